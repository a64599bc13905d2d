"""Volume-normalized rescaling of physical flow snapshots.

Single source of truth for the rescaling exponents: every field of the flow
scales by a fixed power of the enclosed volume, and the engine delegates
here instead of carrying its own copy of the table.
"""

from __future__ import annotations

import numpy as np

from . import support_body


def scaling_exponents(n: int, alpha: float) -> dict:
    """Power of V applied to each field when passing to the rescaled flow."""
    return {
        "S": -1.0 / (n + 1),
        "g": -2.0 / (n + 1),
        "h": -1.0 / (n + 1),
        "H": 1.0 / (n + 1),
        "K": float(n) / (n + 1),
        "eta": n * (alpha - 1.0) / (n + 1),
    }


def apply_scaling(state):
    """FlowState -> RescaledState with unit enclosed volume.

    S_tilde = V^(-1/(n+1)) S, tau = -log(V / V0), and eta rescaled through
    the exponent table.  The result has volume 1 up to rounding.
    """
    from .flow_engine import RescaledState, eta

    if state.V <= 0.0:
        raise ValueError("snapshot volume must be positive")
    exp = scaling_exponents(state.n, state.alpha)
    s_tilde = state.V ** exp["S"] * state.body.values
    body = support_body.new_field(state.body.grid, s_tilde, label="rescaled")
    v_check = support_body.volume(body)
    if abs(v_check - 1.0) > 1e-9:
        raise AssertionError(f"rescaled volume {v_check} deviates from 1")
    eta_tilde = state.V ** exp["eta"] * eta(state.body, state.alpha)
    tau = -np.log(state.V / state.V0)
    return RescaledState(
        body=body, tau=float(tau), eta=float(eta_tilde),
        alpha=state.alpha, n=state.n,
    )
