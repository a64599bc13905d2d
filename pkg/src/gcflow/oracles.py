"""Independent reference solutions used to validate the numerics.

Nothing here shares differentiation code with the main modules: the sphere
solution is a closed-form ODE solution, the ellipse curvature is
differentiated by hand, and the dense functionals only reuse quadrature at
a much finer resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import support_body
from .errors import PastExtinction
from .sphere_domain import make_grid


@dataclass(frozen=True)
class SphereSolution:
    """Round sphere shrinking with normal speed K^alpha.

    The radius obeys r' = -r^(-n*alpha), so
    r(t) = (r0^(1+n*alpha) - (1+n*alpha) t)^(1/(1+n*alpha)).
    """

    r0: float
    alpha: float
    n: int

    def __post_init__(self):
        if self.r0 <= 0.0:
            raise ValueError("r0 must be positive")

    @property
    def extinction_time(self) -> float:
        p = 1.0 + self.n * self.alpha
        return self.r0**p / p


def sphere_radius(sol: SphereSolution, t: float) -> float:
    p = 1.0 + sol.n * sol.alpha
    if t >= sol.extinction_time:
        raise PastExtinction(f"t={t} >= T*={sol.extinction_time}")
    return float((sol.r0**p - p * t) ** (1.0 / p))


def ellipse_curvature(a: float, b: float, psi: float) -> float:
    """Curvature of the ellipse x^2/a^2 + y^2/b^2 = 1 where the outward
    normal is (cos psi, sin psi).

    Uses the support function S(psi) = sqrt(a^2 cos^2 + b^2 sin^2) and
    K = 1/(S'' + S), with S'' differentiated by hand (chain rule on the
    square root), not by any stencil.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("semi-axes must be positive")
    u = a**2 * np.cos(psi) ** 2 + b**2 * np.sin(psi) ** 2
    du = (b**2 - a**2) * np.sin(2.0 * psi)
    ddu = 2.0 * (b**2 - a**2) * np.cos(2.0 * psi)
    s = np.sqrt(u)
    s2 = ddu / (2.0 * s) - du**2 / (4.0 * u * s)
    k = 1.0 / (s2 + s)
    return k if isinstance(k, np.ndarray) else float(k)


def ellipse_area(a: float, b: float) -> float:
    return np.pi * a * b


def ellipse_perimeter(a: float, b: float) -> float:
    """Arc length by adaptive quadrature of the parametric speed."""
    speed = lambda u: np.hypot(a * np.sin(u), b * np.cos(u))
    val, _ = quad(speed, 0.0, 2.0 * np.pi, limit=200, epsabs=1e-12, epsrel=1e-12)
    return val


def dense_functional(spec: support_body.BodySpec, functional: str, dim: int,
                     resolution, factor: int = 8, alpha: float | None = None) -> float:
    """Evaluate a functional of an analytic body on a grid refined by ``factor``.

    functional is one of volume | area | eta | itilde.  For itilde the body
    is volume-normalized first, matching the caller's convention.
    """
    if dim == 1:
        grid = make_grid(1, int(resolution) * factor)
    else:
        grid = make_grid(2, (resolution[0] * factor, resolution[1] * factor))
    body = support_body.make_body(spec, grid)
    if functional == "volume":
        return support_body.volume(body)
    if functional == "area":
        return support_body.area(body)
    if functional == "eta":
        from .flow_engine import eta

        return eta(body, alpha)
    if functional == "itilde":
        from .diagnostics import integral_quantity

        v = support_body.volume(body)
        normalized = support_body.new_field(
            grid, body.values / v ** (1.0 / (dim + 1)), label="normalized"
        )
        return integral_quantity(normalized, alpha)
    raise ValueError(f"unknown functional {functional!r}")
