"""Explicit time stepping for the power-of-Gauss-curvature flow.

Physical flow:  dS/dt = -K^alpha.
Rescaled flow:  dS/dtau = -K^alpha / eta + S/(n+1), volume pinned to 1 by a
multiplicative re-projection after every step (the continuous equation
preserves unit volume only in exact arithmetic).

Both flows use forward Euler with a per-step stability bound derived from
the linearized diffusion coefficient alpha * K^alpha / lambda_min(radii
matrix), plus halving retries when a step loses convexity or positivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import support_body as sb
from .errors import NonConvex, NonPositiveSupport, NonMonotone, StepFailure, Timeout

MAX_HALVINGS = 20
RECENTER_RATIO = 0.1  # recenter the physical flow when min S < ratio * max S
DTAU_CAP = 0.05  # keeps the Euler error of the linear growth term small


@dataclass(frozen=True)
class FlowState:
    """One snapshot of the physical flow."""

    body: sb.SupportField
    t: float
    dt_last: float
    V: float
    V0: float
    step_count: int
    alpha: float
    n: int
    shift: np.ndarray  # accumulated re-centering translation


@dataclass(frozen=True)
class RescaledState:
    """One snapshot of the volume-normalized flow."""

    body: sb.SupportField
    tau: float
    eta: float
    alpha: float
    n: int


def make_flow(body: sb.SupportField, alpha: float) -> FlowState:
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    v = sb.volume(body)
    return FlowState(
        body=body, t=0.0, dt_last=0.0, V=v, V0=v, step_count=0,
        alpha=float(alpha), n=body.n, shift=np.zeros(body.grid.dim + 1),
    )


def make_rescaled(body: sb.SupportField, alpha: float) -> RescaledState:
    """Normalize a body to unit volume and wrap it as a rescaled state."""
    v = sb.volume(body)
    n = body.n
    normalized = sb.new_field(body.grid, body.values / v ** (1.0 / (n + 1)),
                              label=body.label)
    return RescaledState(body=normalized, tau=0.0, eta=eta(normalized, alpha),
                         alpha=float(alpha), n=n)


# ---------------------------------------------------------------------------
# pointwise quantities


def eta(body: sb.SupportField, alpha: float) -> float:
    """Volume dissipation rate: integral of K^(alpha-1) over the Gauss sphere."""
    det = sb.require_convex(body)[2]
    return float(np.sum(body.grid.weights * det ** (1.0 - alpha)))


def physical_rhs(body: sb.SupportField, alpha: float) -> np.ndarray:
    """Speed field of the physical flow, -K^alpha per node."""
    det = sb.require_convex(body)[2]
    return -(det ** (-alpha))


def stable_dt(body: sb.SupportField, alpha: float, safety: float = 0.5) -> float:
    """Explicit-Euler step bound.

    dt = safety * spacing^2 / (2n * max(alpha K^alpha / lambda_min)), then
    clamped so the predicted min of S stays positive.  For alpha = 0 the
    diffusion coefficient vanishes and only the positivity clamp acts.
    """
    if not 0.0 < safety <= 1.0:
        raise ValueError("safety must lie in (0, 1]")
    emin, _, det, _ = sb.require_convex(body)
    k_alpha = det ** (-alpha)
    n = body.n
    coeff = float(np.max(alpha * k_alpha / emin))
    dt = np.inf if coeff <= 0.0 else safety * body.grid.spacing**2 / (2.0 * n * coeff)
    dt_pos = 0.5 * float(np.min(body.values / k_alpha))
    return float(min(dt, dt_pos))


# ---------------------------------------------------------------------------
# physical flow


def step_physical(state: FlowState, safety: float = 0.5) -> FlowState:
    """Advance one accepted Euler step, halving dt on convexity failures."""
    if not 0.0 < safety <= 1.0:
        raise ValueError("safety must lie in (0, 1]")
    body, alpha, n = state.body, state.alpha, state.n
    grid = body.grid
    emin, _, det, _ = sb.require_convex(body)
    k_alpha = det ** (-alpha)
    rhs = -k_alpha
    coeff = float(np.max(alpha * k_alpha / emin))
    dt = np.inf if coeff <= 0.0 else safety * grid.spacing**2 / (2.0 * n * coeff)
    dt = float(min(dt, 0.5 * float(np.min(body.values / k_alpha))))
    for _ in range(MAX_HALVINGS + 1):
        trial = body.values + dt * rhs
        if np.min(trial) > 0.0:
            new_body = sb.SupportField(grid, trial, body.label)
            emin_new, _, det_new, _ = sb.principal_radii(new_body)
            if np.min(emin_new) > sb.convexity_threshold(new_body):
                shift = state.shift
                if np.min(trial) < RECENTER_RATIO * np.max(trial):
                    c = sb.centroid(new_body)
                    new_body = replace(
                        new_body, values=new_body.values - new_body.grid.nodes @ c
                    )
                    shift = shift + c
                    det_new = sb.principal_radii(new_body)[2]
                v = float(
                    np.sum(grid.weights * new_body.values * det_new) / (n + 1)
                )
                return FlowState(
                    body=new_body,
                    t=state.t + dt,
                    dt_last=dt,
                    V=v,
                    V0=state.V0,
                    step_count=state.step_count + 1,
                    alpha=alpha,
                    n=state.n,
                    shift=shift,
                )
        dt *= 0.5
    raise StepFailure(
        f"no acceptable step after {MAX_HALVINGS} halvings at t={state.t:.6g}"
    )


@dataclass
class PhysicalRun:
    """Result of run_to_extinction."""

    final: FlowState
    status: str  # "extinct" | "step_failure"
    t_star: float | None
    t: np.ndarray  # per accepted step
    V: np.ndarray
    dt: np.ndarray
    S_min: np.ndarray
    S_max: np.ndarray


def estimate_extinction_time(t, V, alpha: float, n: int) -> float | None:
    """Extrapolate V^((1+n*alpha)/(n+1)), which is linear in t for spheres,
    over the final 10% of the samples."""
    t = np.asarray(t, dtype=float)
    V = np.asarray(V, dtype=float)
    if t.size < 2:
        return None
    tail = max(2, int(np.ceil(0.1 * t.size)))
    y = V[-tail:] ** ((1.0 + n * alpha) / (n + 1.0))
    slope, intercept = np.polyfit(t[-tail:], y, 1)
    if slope >= 0.0:
        return None
    return float(-intercept / slope)


def run_to_extinction(state: FlowState, v_min: float | None = None,
                      t_max: float | None = None, max_steps: int = 2_000_000,
                      safety: float = 0.5, sample_every: int = 0,
                      on_sample=None) -> PhysicalRun:
    """Step until V < v_min (default 1e-4 * V(0)) or the stepper fails.

    on_sample(state) is invoked every ``sample_every`` accepted steps when
    both are set.  Raises Timeout if the step/time budget runs out first.
    """
    if v_min is None:
        v_min = 1e-4 * state.V0
    ts, vs, dts, smins, smaxs = [], [], [], [], []
    status = None
    while True:
        if state.V < v_min:
            status = "extinct"
            break
        if state.step_count >= max_steps or (t_max is not None and state.t >= t_max):
            raise Timeout(
                f"budget exhausted at step {state.step_count}, t={state.t:.6g}, "
                f"V={state.V:.3e} >= v_min={v_min:.3e}"
            )
        try:
            state = step_physical(state, safety)
        except StepFailure:
            status = "step_failure"
            break
        ts.append(state.t)
        vs.append(state.V)
        dts.append(state.dt_last)
        smins.append(float(np.min(state.body.values)))
        smaxs.append(float(np.max(state.body.values)))
        if on_sample is not None and sample_every and state.step_count % sample_every == 0:
            on_sample(state)
    t_arr = np.asarray(ts)
    v_arr = np.asarray(vs)
    return PhysicalRun(
        final=state,
        status=status,
        t_star=estimate_extinction_time(t_arr, v_arr, state.alpha, state.n),
        t=t_arr,
        V=v_arr,
        dt=np.asarray(dts),
        S_min=np.asarray(smins),
        S_max=np.asarray(smaxs),
    )


# ---------------------------------------------------------------------------
# rescaled flow


def step_rescaled(state: RescaledState, safety: float = 0.5) -> RescaledState:
    """One Euler step in tau followed by multiplicative volume re-projection."""
    body, alpha, n = state.body, state.alpha, state.n
    emin, _, det, _ = sb.require_convex(body)
    k_alpha = det ** (-alpha)
    eta_now = float(np.sum(body.grid.weights * det ** (1.0 - alpha)))
    rhs = -k_alpha / eta_now + body.values / (n + 1.0)
    coeff = float(np.max(alpha * k_alpha / emin)) / eta_now
    dtau = np.inf if coeff <= 0.0 else safety * body.grid.spacing**2 / (2.0 * n * coeff)
    shrinking = rhs < 0.0
    if np.any(shrinking):
        dtau = min(dtau, 0.5 * float(np.min(body.values[shrinking] / -rhs[shrinking])))
    dtau = min(dtau, DTAU_CAP)
    for _ in range(MAX_HALVINGS + 1):
        trial = body.values + dtau * rhs
        if np.min(trial) > 0.0:
            trial_body = sb.SupportField(body.grid, trial, body.label)
            try:
                v = sb.volume(trial_body)
                projected = sb.SupportField(
                    body.grid, trial * v ** (-1.0 / (n + 1.0)), body.label
                )
                det_new = sb.require_convex(projected)[2]
            except NonConvex:
                pass
            else:
                eta_new = float(
                    np.sum(body.grid.weights * det_new ** (1.0 - alpha))
                )
                return RescaledState(
                    body=projected, tau=state.tau + dtau, eta=eta_new,
                    alpha=alpha, n=n,
                )
        dtau *= 0.5
    raise StepFailure(
        f"no acceptable rescaled step after {MAX_HALVINGS} halvings at "
        f"tau={state.tau:.6g}"
    )


@dataclass
class RescaledRun:
    final: RescaledState
    status: str  # "reached_tau_end" | "step_failure"
    tau: np.ndarray
    S_min: np.ndarray
    S_max: np.ndarray


def run_rescaled(state: RescaledState, tau_end: float, max_steps: int = 2_000_000,
                 safety: float = 0.5, sample_dtau: float = 0.0,
                 on_sample=None) -> RescaledRun:
    """Run the rescaled flow to tau_end.

    on_sample(state) fires whenever tau has advanced by at least
    ``sample_dtau`` since the last sample (and once at the start and end).
    """
    taus, smins, smaxs = [], [], []
    status = "reached_tau_end"
    last_sample = -np.inf
    steps = 0
    if on_sample is not None:
        on_sample(state)
        last_sample = state.tau
    while state.tau < tau_end:
        if steps >= max_steps:
            raise Timeout(f"max_steps reached at tau={state.tau:.6g}")
        try:
            state = step_rescaled(state, safety)
        except StepFailure:
            status = "step_failure"
            break
        steps += 1
        taus.append(state.tau)
        smins.append(float(np.min(state.body.values)))
        smaxs.append(float(np.max(state.body.values)))
        if on_sample is not None and state.tau - last_sample >= sample_dtau:
            on_sample(state)
            last_sample = state.tau
    if on_sample is not None and state.tau > last_sample:
        on_sample(state)
    return RescaledRun(
        final=state, status=status, tau=np.asarray(taus),
        S_min=np.asarray(smins), S_max=np.asarray(smaxs),
    )


# ---------------------------------------------------------------------------
# reparameterization


def tau_of_t(v_series) -> np.ndarray:
    """Logarithmic volume time tau = -log(V / V(0)) for a decreasing series."""
    v = np.asarray(v_series, dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("volumes must be positive")
    if np.any(np.diff(v) >= 0.0):
        raise NonMonotone("volume series is not strictly decreasing")
    return -np.log(v / v[0])


def rescale_snapshot(state: FlowState) -> RescaledState:
    """Volume-normalize a physical snapshot (delegates to the rescaler)."""
    from .rescaler import apply_scaling

    return apply_scaling(state)
