"""Self-contained verification suites for the ``verify`` subcommand.

Each suite is a callable returning a list of (check_name, passed, detail)
tuples.  They run at desk scale (seconds, not minutes) and exercise the
same machinery as the full test battery.
"""

from __future__ import annotations

import numpy as np

from . import diagnostics as dg
from . import flow_engine as fe
from . import oracles
from . import support_body as sb
from .sphere_domain import make_grid


def _check(name, value, limit, fmt="{:.3e}"):
    return (name, bool(value <= limit),
            f"value {fmt.format(value)} vs limit {fmt.format(limit)}")


def suite_sphere_extinction():
    results = []
    for dim, res, tol in ((1, 256, 5e-3), (2, (16, 32), 1e-2)):
        grid = make_grid(dim, res)
        state = fe.make_flow(sb.sphere(grid, 1.0), 1.0)
        run = fe.run_to_extinction(state, safety=0.5)
        exact = oracles.SphereSolution(1.0, 1.0, dim).extinction_time
        err = abs(run.t_star - exact) / exact
        results.append(_check(f"dim{dim}_extinction_rel_err", err, tol))
    return results


def suite_itilde_monotone():
    grid = make_grid(1, 128)
    body = sb.perturbed_sphere(grid, 1.0, ((2, 0.08), (3, 0.04)))
    records = []
    run = fe.run_rescaled(
        fe.make_rescaled(body, 1.0), 2.0, sample_dtau=0.05,
        on_sample=lambda st: records.append(dg.make_record(st)),
    )
    report = dg.monotonicity_report(records)
    return [
        ("reached_tau_end", run.status == "reached_tau_end", run.status),
        _check("itilde_max_excursion", report.max_excursion, report.tol),
    ]


def suite_soliton_ellipse():
    grid = make_grid(1, 256)
    body = sb.ellipsoid(grid, (2.0, 1.0))
    start = None
    records = []

    def sample(st):
        nonlocal start
        rec = dg.make_record(st)
        if start is None:
            start = st.body
        records.append((dg.shape_distance(st.body, start), rec.residual))

    fe.run_rescaled(fe.make_rescaled(body, 1.0 / 3.0), 0.5,
                    sample_dtau=0.05, on_sample=sample)
    drift = max(d for d, _ in records)
    residual = max(r for _, r in records)
    return [
        _check("shape_drift", drift, 1e-2),
        _check("soliton_residual", residual, 2e-3),
    ]


def suite_quadrature_convergence():
    spec = sb.BodySpec(kind="ellipsoid", radii=(1.4, 0.8))
    results = []
    for functional in ("volume", "eta"):
        ref = oracles.dense_functional(spec, functional, 1, 128, alpha=0.5)
        errs = []
        for res in (16, 32, 64):
            grid = make_grid(1, res)
            body = sb.make_body(spec, grid)
            val = (sb.volume(body) if functional == "volume"
                   else fe.eta(body, 0.5))
            errs.append(abs(val - ref))
        order = np.log2(errs[0] / errs[1])
        results.append((f"{functional}_order", bool(order >= 1.8),
                        f"order {order:.2f} (need >= 1.8)"))
    return results


SUITES = {
    "sphere-extinction": suite_sphere_extinction,
    "itilde-monotone": suite_itilde_monotone,
    "soliton-ellipse": suite_soliton_ellipse,
    "quadrature-convergence": suite_quadrature_convergence,
}
