"""Monitoring of the rescaled flow: the monotone integral quantity,
pinching and self-similarity metrics, and the a priori bound flags."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import support_body as sb
from .errors import GridMismatch, NonPositiveSupport
from .flow_engine import RescaledState
from .sphere_domain import covariant_hessian

BOUND_SLACK = 1.0 + 1e-9
ENVELOPE_SLACK = 1.1


def integral_quantity(body: sb.SupportField, alpha: float) -> float:
    """The monotone integral of the rescaled flow.

    For alpha != 1 this is (integral of S^(1 - 1/alpha))^sign(alpha - 1);
    for alpha = 1 it is the integral of log S.  The body must already be
    volume-normalized (asserted to 1e-6).
    """
    if np.min(body.values) <= 0.0:
        raise NonPositiveSupport("support function must be positive")
    v = sb.volume(body)
    if abs(v - 1.0) > 1e-6:
        raise ValueError(f"body must be volume-normalized, got V={v!r}")
    w, s = body.grid.weights, body.values
    if alpha == 1.0:
        return float(np.sum(w * np.log(s)))
    base = float(np.sum(w * s ** (1.0 - 1.0 / alpha)))
    return base if alpha > 1.0 else 1.0 / base


def self_similar_residual(body: sb.SupportField, alpha: float):
    """Best-fit constant and relative L2 residual of K^alpha = C * S.

    C minimizes the weighted L2 norm of K^alpha - C*S; the residual is that
    norm divided by the weighted L2 norm of K^alpha.  Zero exactly at
    self-similar (soliton) shapes.
    """
    det = sb.require_convex(body)[2]
    k_alpha = det ** (-alpha)
    w, s = body.grid.weights, body.values
    c_best = float(np.sum(w * k_alpha * s) / np.sum(w * s * s))
    num = np.sqrt(np.sum(w * (k_alpha - c_best * s) ** 2))
    den = np.sqrt(np.sum(w * k_alpha**2))
    return c_best, float(num / den)


def pinching(summary: sb.CurvatureSummary) -> float:
    """Global ratio of largest to smallest principal curvature; 1 iff round."""
    return float(np.max(summary.lam_max) / np.min(summary.lam_min))


def shape_distance(a: sb.SupportField, b: sb.SupportField) -> float:
    """Relative sup-norm support distance after re-centering both bodies.

    Equals the Hausdorff distance (scaled by max S of b) for centered
    convex bodies on a shared grid.
    """
    if a.grid.dim != b.grid.dim or a.grid.shape != b.grid.shape:
        raise GridMismatch(f"grids differ: {a.grid.shape} vs {b.grid.shape}")
    sa = sb.recenter(a).values
    sb_ = sb.recenter(b).values
    return float(np.max(np.abs(sa - sb_)) / np.max(sb_))


def hessian_sup(body: sb.SupportField) -> float:
    """Max node Frobenius norm of the covariant Hessian of S."""
    h = covariant_hessian(body.grid, body.values)
    if body.grid.dim == 1:
        return float(np.max(np.abs(h)))
    return float(np.max(np.sqrt((h**2).sum(axis=(1, 2)))))


# ---------------------------------------------------------------------------
# a priori bound suite


class BoundMonitor:
    """Tracks the a priori curvature bounds along one trajectory.

    Flags per update:
      speed_bound_inner  -- sup K^alpha so far vs the constant built from
                            rho = half the inner-radius lower bound
      speed_bound_width  -- same with rho = a quarter of the minimal width
      trace_bound        -- sum of principal radii vs its degenerate-speed
                            bound; evaluated for 1/n <= alpha <= 1 only
      support_envelope, normalizer_envelope, gauss_envelope
                         -- S, eta, K stay within 10% of the running
                            envelope (rescaled trajectories only)
    """

    def __init__(self, alpha: float, n: int, rescaled: bool = True):
        self.alpha = float(alpha)
        self.n = int(n)
        self.rescaled = rescaled
        self._initialized = False
        self._sup_k_alpha = None  # running sup over the trajectory
        self._sup0_k_alpha = None
        self._sup0_trace = None
        self._env = {}

    def _speed_constant(self, rho: float) -> float:
        na = self.n * self.alpha
        return ((na + 1.0) / (na * rho)) ** na

    def _check_envelope(self, name: str, lo: float, hi: float) -> bool:
        if name not in self._env:
            self._env[name] = [lo, hi]
            return True
        env = self._env[name]
        ok = lo >= env[0] / ENVELOPE_SLACK and hi <= env[1] * ENVELOPE_SLACK
        env[0] = min(env[0], lo)
        env[1] = max(env[1], hi)
        return ok

    def update(self, body: sb.SupportField, summary: sb.CurvatureSummary,
               eta_value: float) -> dict:
        alpha, n = self.alpha, self.n
        k_alpha_max = float(np.max(summary.K ** alpha))
        trace_max = float(np.max(summary.reverse_trace))
        if not self._initialized:
            self._sup0_k_alpha = k_alpha_max
            self._sup0_trace = trace_max
            self._sup_k_alpha = k_alpha_max
            self._initialized = True
        self._sup_k_alpha = max(self._sup_k_alpha, k_alpha_max)

        flags = {}
        r_in, _ = sb.radii(body)
        w_min, _ = sb.width_extremes(body)
        flags["speed_bound_inner"] = bool(
            self._sup_k_alpha
            <= max(self._sup0_k_alpha, self._speed_constant(0.5 * r_in)) * BOUND_SLACK
        )
        flags["speed_bound_width"] = bool(
            self._sup_k_alpha
            <= max(self._sup0_k_alpha, self._speed_constant(0.25 * w_min)) * BOUND_SLACK
        )
        if 1.0 / n <= alpha <= 1.0:
            coeff = (n * alpha - 1.0) / alpha
            bound = max(
                float(np.max(coeff * summary.K ** (-1.0 / n))), self._sup0_trace
            )
            flags["trace_bound"] = bool(trace_max <= bound * BOUND_SLACK)
        if self.rescaled:
            flags["support_envelope"] = self._check_envelope(
                "S", float(np.min(body.values)), float(np.max(body.values))
            )
            flags["normalizer_envelope"] = self._check_envelope(
                "eta", eta_value, eta_value
            )
            flags["gauss_envelope"] = self._check_envelope(
                "K", summary.K_min, summary.K_max
            )
        return flags


def bound_suite(monitor: BoundMonitor, body: sb.SupportField,
                summary: sb.CurvatureSummary | None = None,
                eta_value: float | None = None) -> dict:
    """Evaluate the bound flags for one state against a trajectory monitor."""
    if summary is None:
        summary = sb.curvature_summary(body)
    if eta_value is None:
        from .flow_engine import eta

        eta_value = eta(body, monitor.alpha)
    return monitor.update(body, summary, eta_value)


# ---------------------------------------------------------------------------
# per-state records and the monotonicity report


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time slice of the rescaled-flow diagnostics."""

    tau: float
    Itilde: float
    pinching: float
    residual: float
    C_best: float
    w_min: float
    w_max: float
    S_min: float
    S_max: float
    eta: float
    K_min: float
    K_max: float
    hess_sup: float
    bound_flags: dict = field(default_factory=dict)


def make_record(state: RescaledState, monitor: BoundMonitor | None = None
                ) -> DiagnosticsRecord:
    body, alpha = state.body, state.alpha
    summary = sb.curvature_summary(body)
    # Itilde and the soliton relation hold for a choice of origin, so both
    # are evaluated on a re-centered copy (with the O(grid^2) volume drift
    # of re-centering repaired); the flow state itself is left untouched
    centered = sb.recenter(body)
    v = sb.volume(centered)
    centered = sb.SupportField(
        centered.grid, centered.values / v ** (1.0 / (state.n + 1)), centered.label
    )
    itilde = integral_quantity(centered, alpha)
    c_best, residual = self_similar_residual(centered, alpha)
    w_min, w_max = sb.width_extremes(body)
    flags = (
        monitor.update(body, summary, state.eta) if monitor is not None else {}
    )
    return DiagnosticsRecord(
        tau=state.tau,
        Itilde=itilde,
        pinching=pinching(summary),
        residual=residual,
        C_best=c_best,
        w_min=w_min,
        w_max=w_max,
        S_min=float(np.min(body.values)),
        S_max=float(np.max(body.values)),
        eta=state.eta,
        K_min=summary.K_min,
        K_max=summary.K_max,
        hess_sup=hessian_sup(body),
        bound_flags=flags,
    )


@dataclass(frozen=True)
class MonotonicityReport:
    max_excursion: float  # largest positive dI/dtau over consecutive pairs
    tol: float
    passed: bool
    n_pairs: int
    slopes: np.ndarray


def monotonicity_report(records, tol: float | None = None) -> MonotonicityReport:
    """Check that the integral quantity never increases along the records.

    Records must be sorted by strictly increasing tau (single run).  The
    default tolerance scales with |I(0)| because Euler stepping introduces
    O(dtau) excursions.
    """
    taus = np.array([r.tau for r in records], dtype=float)
    vals = np.array([r.Itilde for r in records], dtype=float)
    if taus.size < 2:
        raise ValueError("need at least two records")
    if np.any(np.diff(taus) <= 0.0):
        raise ValueError("records must be sorted by strictly increasing tau")
    if tol is None:
        tol = 1e-6 * abs(vals[0]) + 1e-10
    slopes = np.diff(vals) / np.diff(taus)
    max_exc = float(np.max(slopes))
    return MonotonicityReport(
        max_excursion=max_exc,
        tol=float(tol),
        passed=bool(max_exc <= tol),
        n_pairs=slopes.size,
        slopes=slopes,
    )
