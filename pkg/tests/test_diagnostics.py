import numpy as np
import pytest

from gcflow import diagnostics as dg
from gcflow import flow_engine as fe
from gcflow import oracles
from gcflow import support_body as sb
from gcflow.errors import GridMismatch
from gcflow.sphere_domain import make_grid


def _unit_volume(body):
    v = sb.volume(body)
    return sb.new_field(body.grid, body.values / v ** (1.0 / (body.n + 1)))


def test_integral_quantity_round_values():
    # unit-area circle: S = 1/sqrt(pi)
    g = make_grid(1, 64)
    b = _unit_volume(sb.sphere(g, 1.0))
    # alpha = 1: integral of log S
    expected = 2.0 * np.pi * np.log(1.0 / np.sqrt(np.pi))
    assert abs(dg.integral_quantity(b, 1.0) - expected) < 1e-12
    # alpha = 1/2: (integral of S^-1)^-1, sign exponent -1 since alpha < 1
    expected = (2.0 * np.pi * np.sqrt(np.pi)) ** -1.0
    assert abs(dg.integral_quantity(b, 0.5) - expected) < 1e-12
    # alpha = 2: (integral of S^(1/2))^+1
    expected = 2.0 * np.pi * np.pi ** -0.25
    assert abs(dg.integral_quantity(b, 2.0) - expected) < 1e-12


def test_integral_quantity_requires_unit_volume():
    g = make_grid(1, 64)
    with pytest.raises(ValueError):
        dg.integral_quantity(sb.sphere(g, 2.0), 1.0)


def test_integral_quantity_matches_dense_quadrature():
    spec = sb.BodySpec(kind="ellipsoid", radii=(1.5, 0.9))
    g = make_grid(1, 256)
    b = _unit_volume(sb.make_body(spec, g))
    dense = oracles.dense_functional(spec, "itilde", 1, 256, factor=8, alpha=0.5)
    assert abs(dg.integral_quantity(b, 0.5) - dense) < 5e-6


def test_residual_zero_for_round_sphere():
    g = make_grid(2, (16, 32))
    b = _unit_volume(sb.sphere(g, 1.0))
    c, resid = dg.self_similar_residual(b, 1.0)
    assert resid < 1e-12
    # K^alpha = C S with S, K constant: C = K / S
    s = b.values[0]
    assert abs(c - s ** -2.0 / s) < 1e-10


def test_residual_ellipse_soliton_property():
    # with speed K^(1/3) every origin-centered ellipse is self-similar,
    # with speed K it is not
    g = make_grid(1, 512)
    b = _unit_volume(sb.ellipsoid(g, (2.0, 1.0)))
    _, r_soliton = dg.self_similar_residual(b, 1.0 / 3.0)
    _, r_gauss = dg.self_similar_residual(b, 1.0)
    assert r_soliton < 1e-3
    assert r_gauss > 0.05


def test_pinching_values():
    g = make_grid(1, 512)
    assert abs(dg.pinching(sb.curvature_summary(sb.sphere(g, 1.3))) - 1.0) < 1e-12
    # 2:1 ellipse: K ranges over [1/4, 2], ratio 8
    summary = sb.curvature_summary(sb.ellipsoid(g, (2.0, 1.0)))
    assert abs(dg.pinching(summary) - 8.0) < 2e-2


def test_shape_distance_basic():
    g = make_grid(1, 256)
    a = sb.sphere(g, 1.0)
    b = sb.sphere(g, 1.1)
    assert abs(dg.shape_distance(a, b) - 0.1 / 1.1) < 1e-12
    assert dg.shape_distance(a, a) == 0.0
    # translation is quotiented out by re-centering
    shifted = sb.new_field(g, 1.0 + 0.2 * g.nodes[:, 0])
    assert dg.shape_distance(a, shifted) < 1e-3
    with pytest.raises(GridMismatch):
        dg.shape_distance(a, sb.sphere(make_grid(1, 128), 1.0))


def test_shape_distance_against_brute_force_hausdorff():
    g = make_grid(1, 512)
    a = sb.ellipsoid(g, (1.3, 1.0))
    b = sb.sphere(g, 1.0)
    # sup-norm support distance of centered bodies == Hausdorff distance
    hausdorff = np.max(np.abs(a.values - b.values))
    assert abs(dg.shape_distance(a, b) * np.max(b.values) - hausdorff) < 1e-10


def test_bound_monitor_sphere_flags():
    g = make_grid(2, (16, 32))
    b = _unit_volume(sb.sphere(g, 1.0))
    monitor = dg.BoundMonitor(1.0, 2)
    flags = dg.bound_suite(monitor, b)
    # unit ball: r_in ~ 0.62, rho0 = 0.31, constant (3/(2 rho0))^2 ~ 23
    # easily dominates sup K^alpha ~ 2.6; all flags must pass
    assert flags["speed_bound_inner"] and flags["speed_bound_width"]
    assert flags["trace_bound"]
    assert flags["support_envelope"]
    assert flags["normalizer_envelope"] and flags["gauss_envelope"]


def test_bound_monitor_trace_flag_alpha_range():
    g = make_grid(2, (16, 32))
    b = _unit_volume(sb.sphere(g, 1.0))
    # alpha below 1/n or above 1: trace bound not applicable
    for alpha, present in ((0.3, False), (0.5, True), (1.0, True), (1.5, False)):
        flags = dg.bound_suite(dg.BoundMonitor(alpha, 2), b)
        assert ("trace_bound" in flags) == present


def test_bound_monitor_envelope_catches_growth():
    g = make_grid(1, 64)
    monitor = dg.BoundMonitor(1.0, 1)
    b = _unit_volume(sb.sphere(g, 1.0))
    assert dg.bound_suite(monitor, b)["support_envelope"]
    grown = sb.new_field(g, 1.5 * b.values)
    assert not dg.bound_suite(monitor, grown)["support_envelope"]


def test_make_record_and_monotonicity_report():
    g = make_grid(1, 128)
    body = sb.perturbed_sphere(g, 1.0, ((2, 0.08), (-2, 0.04)))
    state = fe.make_rescaled(body, 1.0)
    monitor = dg.BoundMonitor(1.0, 1)
    records = []
    fe.run_rescaled(
        state, 1.5, sample_dtau=0.05,
        on_sample=lambda st: records.append(dg.make_record(st, monitor)),
    )
    report = dg.monotonicity_report(records)
    assert report.passed
    assert report.n_pairs == len(records) - 1
    assert report.max_excursion <= report.tol
    # the perturbation decays, so pinching improves
    assert records[-1].pinching < records[0].pinching
    assert all(all(r.bound_flags.values()) for r in records)


def test_monotonicity_report_flags_increase():
    class Rec:
        def __init__(self, tau, val):
            self.tau = tau
            self.Itilde = val

    recs = [Rec(0.0, -1.0), Rec(0.1, -1.1), Rec(0.2, -1.0)]
    report = dg.monotonicity_report(recs)
    assert not report.passed
    assert report.max_excursion > 0.0


def test_hessian_sup_sphere():
    g = make_grid(2, (32, 64))
    assert dg.hessian_sup(sb.sphere(g, 1.0)) < 1e-10
