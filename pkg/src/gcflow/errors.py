"""Exception types shared across the package."""


class GCFlowError(Exception):
    """Base class for all package errors."""


class NonConvex(GCFlowError):
    """Principal-radii matrix lost positive definiteness somewhere.

    Carries the worst node index and its smallest eigenvalue.
    """

    def __init__(self, node: int, eigenvalue: float):
        self.node = int(node)
        self.eigenvalue = float(eigenvalue)
        super().__init__(
            f"radii matrix not positive definite: node {self.node}, "
            f"min eigenvalue {self.eigenvalue:.3e}"
        )


class NonPositiveSupport(GCFlowError):
    """Support function is not strictly positive (origin outside the body)."""


class DegenerateHull(GCFlowError):
    """Point cloud has no interior: some width is (near) zero."""


class StepFailure(GCFlowError):
    """Time step could not be accepted even after the maximum number of halvings."""


class Timeout(GCFlowError):
    """Run budget (t_max / max_steps) exhausted before the stop criterion was met."""


class NonMonotone(GCFlowError):
    """A series that must be monotone is not."""


class GridMismatch(GCFlowError):
    """Two fields that must share a grid do not."""


class PastExtinction(GCFlowError):
    """Closed-form sphere solution evaluated at or after its extinction time."""


class FormatMismatch(GCFlowError):
    """Export format is incompatible with the snapshot dimension."""


class ConfigError(GCFlowError):
    """Malformed or inconsistent run configuration."""
