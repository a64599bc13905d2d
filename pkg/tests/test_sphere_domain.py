import numpy as np
import pytest

from gcflow.sphere_domain import (
    MIN_RESOLUTION,
    covariant_gradient,
    covariant_hessian,
    hessian_components,
    make_grid,
)


def test_grid_basic_invariants_dim1():
    g = make_grid(1, 64)
    assert g.dim == 1 and g.size == 64
    assert abs(g.weights.sum() - 2.0 * np.pi) < 1e-12
    assert abs(g.spacing - 2.0 * np.pi / 64) < 1e-15
    assert np.allclose(g.nodes[g.antipode], -g.nodes, atol=1e-14)
    assert np.array_equal(g.antipode[g.antipode], np.arange(64))


def test_grid_basic_invariants_dim2():
    g = make_grid(2, (16, 32))
    assert g.dim == 2 and g.size == 16 * 32 and g.shape == (16, 32)
    assert abs(g.weights.sum() - 4.0 * np.pi) < 1e-12
    # half-cell offset keeps nodes away from the poles
    theta = g.to2d(g.theta)
    assert theta.min() > 0.0 and theta.max() < np.pi
    assert np.allclose(g.nodes[g.antipode], -g.nodes, atol=1e-14)
    assert np.array_equal(g.antipode[g.antipode], np.arange(g.size))


def test_grid_rejects_bad_resolutions():
    with pytest.raises(ValueError):
        make_grid(1, MIN_RESOLUTION - 2)
    with pytest.raises(ValueError):
        make_grid(1, 33)  # odd
    with pytest.raises(ValueError):
        make_grid(2, (16, 33))
    with pytest.raises(ValueError):
        make_grid(3, 16)


def test_quadrature_polynomial_moments():
    # integral of z_i z_j over the unit sphere is |S^n| delta_ij / (n+1)
    g1 = make_grid(1, 64)
    z = g1.nodes
    assert abs(np.sum(g1.weights * z[:, 0] ** 2) - np.pi) < 1e-12
    assert abs(np.sum(g1.weights * z[:, 0] * z[:, 1])) < 1e-12
    g2 = make_grid(2, (32, 64))
    z = g2.nodes
    total = 0.0
    for i in range(3):
        val = np.sum(g2.weights * z[:, i] ** 2)
        total += val
        assert abs(val - 4.0 * np.pi / 3.0) < 5e-3
    # the three moments sum to the total measure exactly
    assert abs(total - 4.0 * np.pi) < 1e-12
    assert abs(np.sum(g2.weights * z[:, 0] * z[:, 2])) < 1e-12


def test_gradient_dim1_trig():
    g = make_grid(1, 256)
    f = np.cos(3.0 * g.theta)
    grad = covariant_gradient(g, f)
    exact = -3.0 * np.sin(3.0 * g.theta)
    assert np.max(np.abs(grad - exact)) < 5e-3


def test_gradient_dim2_zonal():
    g = make_grid(2, (64, 128))
    f = np.cos(g.theta)
    grad = covariant_gradient(g, f)
    assert np.max(np.abs(grad[:, 0] + np.sin(g.theta))) < 1e-3
    assert np.max(np.abs(grad[:, 1])) < 1e-12


def test_hessian_dim1_trig():
    g = make_grid(1, 256)
    f = np.cos(2.0 * g.theta)
    h = covariant_hessian(g, f)
    assert np.max(np.abs(h + 4.0 * f)) < 2e-3


def test_hessian_dim2_zonal_exact_form():
    # f = cos^2(theta): H_tt = -2 cos(2 theta), H_tp = 0,
    # H_pp = cot(theta) f_theta = -2 cos^2(theta)
    g = make_grid(2, (64, 128))
    th = g.theta
    h_tt, h_tp, h_pp = hessian_components(g, np.cos(th) ** 2)
    assert np.max(np.abs(h_tt + 2.0 * np.cos(2.0 * th))) < 5e-3
    assert np.max(np.abs(h_tp)) < 1e-10
    assert np.max(np.abs(h_pp + 2.0 * np.cos(th) ** 2)) < 5e-3


def test_hessian_dim2_sectoral_exact_form():
    # f = sin^2(theta) cos(2 phi):
    #   H_tt = 2 cos(2 theta) cos(2 phi)
    #   H_tp = -2 cos(theta) sin(2 phi)
    #   H_pp = (2 cos^2(theta) - 4) cos(2 phi)
    g = make_grid(2, (64, 128))
    th, ph = g.theta, g.phi
    f = np.sin(th) ** 2 * np.cos(2.0 * ph)
    h_tt, h_tp, h_pp = hessian_components(g, f)
    assert np.max(np.abs(h_tt - 2.0 * np.cos(2.0 * th) * np.cos(2.0 * ph))) < 5e-3
    assert np.max(np.abs(h_tp + 2.0 * np.cos(th) * np.sin(2.0 * ph))) < 2e-2
    exact_pp = (2.0 * np.cos(th) ** 2 - 4.0) * np.cos(2.0 * ph)
    assert np.max(np.abs(h_pp - exact_pp)) < 1e-2


def test_hessian_kernel_of_linear_fields():
    # restrictions of linear functions satisfy hess f + f g = 0
    for dim, res in ((1, 128), (2, (32, 64))):
        g = make_grid(dim, res)
        f = g.nodes[:, -1]
        h = covariant_hessian(g, f)
        if dim == 1:
            resid = h + f
        else:
            eye = np.eye(2)
            resid = h + f[:, None, None] * eye
        assert np.max(np.abs(resid)) < 5e-3


def _hessian_error(dim, res):
    g = make_grid(dim, res)
    if dim == 1:
        f = np.cos(2.0 * g.theta)
        return np.max(np.abs(covariant_hessian(g, f) + 4.0 * f))
    th, ph = g.theta, g.phi
    f = np.sin(th) ** 2 * np.cos(2.0 * ph)
    h_tt, _, _ = hessian_components(g, f)
    return np.max(np.abs(h_tt - 2.0 * np.cos(2.0 * th) * np.cos(2.0 * ph)))


def test_hessian_second_order_convergence():
    assert _hessian_error(1, 64) / _hessian_error(1, 128) > 3.5
    assert _hessian_error(2, (16, 32)) / _hessian_error(2, (32, 64)) > 3.5
