"""Structured grids on the unit circle and unit sphere.

Provides quadrature weights and second-order covariant derivative stencils
for scalar fields sampled on the grid, everything expressed in the
orthonormal frame of the round metric.

Grid conventions
----------------
dim 1:  N equispaced nodes theta_k = 2*pi*k/N, nodes (cos, sin), weights
        2*pi/N.  N must be even so every node has an exact antipode.

dim 2:  equiangular latitude-longitude grid with a half-cell offset from
        the poles: theta_j = (j + 1/2)*pi/N_theta, phi_i = 2*pi*i/N_phi.
        Node index is theta-major (index = j*N_phi + i).  Both counts must
        be even: the cross-pole stencil closure maps (theta < 0, phi) to
        (-theta, phi + pi) and the antipodal map sends (theta, phi) to
        (pi - theta, phi + pi), and both need half-turn shifts in phi to
        land on grid nodes.

Ring weights on S^2 are the exact spherical band areas
2*sin(theta_j)*sin(dtheta/2)*dphi; these coincide with midpoint weights
sin(theta)*dtheta*dphi rescaled by a global constant so that the total
weight is exactly 4*pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_RESOLUTION = 8


@dataclass(frozen=True)
class SphereGrid:
    """Immutable discretization of S^1 or S^2."""

    dim: int
    shape: tuple  # (N,) or (N_theta, N_phi)
    nodes: np.ndarray  # (M, dim+1) unit vectors
    weights: np.ndarray  # (M,) quadrature weights, sum = |S^dim|
    spacing: float  # minimal coordinate angular increment
    theta: np.ndarray  # (M,) polar angle (dim 1) / colatitude (dim 2)
    phi: np.ndarray | None  # (M,) longitude, dim 2 only
    antipode: np.ndarray  # (M,) index of the node at -z

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def to2d(self, f: np.ndarray) -> np.ndarray:
        """Reshape a flat field to (N_theta, N_phi).  dim 2 only."""
        return np.asarray(f).reshape(self.shape)

    def surface_measure(self) -> float:
        return 2.0 * np.pi if self.dim == 1 else 4.0 * np.pi


def make_grid(dim: int, resolution) -> SphereGrid:
    """Build a grid on S^dim.

    ``resolution`` is N for dim 1 and (N_theta, N_phi) for dim 2.  Every
    node count must be >= 8 and even.
    """
    if dim == 1:
        n = int(resolution if np.isscalar(resolution) else resolution[0])
        if n < MIN_RESOLUTION:
            raise ValueError(f"need at least {MIN_RESOLUTION} nodes, got {n}")
        if n % 2:
            raise ValueError(f"node count must be even for antipodal closure, got {n}")
        theta = 2.0 * np.pi * np.arange(n) / n
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(n, 2.0 * np.pi / n)
        antipode = (np.arange(n) + n // 2) % n
        return SphereGrid(
            dim=1,
            shape=(n,),
            nodes=nodes,
            weights=weights,
            spacing=2.0 * np.pi / n,
            theta=theta,
            phi=None,
            antipode=antipode,
        )

    if dim == 2:
        nt, nf = (int(resolution[0]), int(resolution[1]))
        if nt < MIN_RESOLUTION or nf < MIN_RESOLUTION:
            raise ValueError(
                f"need at least {MIN_RESOLUTION} nodes per coordinate, got {nt}x{nf}"
            )
        if nt % 2 or nf % 2:
            raise ValueError(
                f"node counts must be even for pole/antipode closure, got {nt}x{nf}"
            )
        dtheta = np.pi / nt
        dphi = 2.0 * np.pi / nf
        th = (np.arange(nt) + 0.5) * dtheta
        ph = np.arange(nf) * dphi
        theta2, phi2 = np.meshgrid(th, ph, indexing="ij")
        theta = theta2.ravel()
        phi = phi2.ravel()
        st, ct = np.sin(theta), np.cos(theta)
        nodes = np.stack([st * np.cos(phi), st * np.sin(phi), ct], axis=1)
        # exact band areas; sum telescopes to 4*pi
        weights = (2.0 * np.sin(theta) * np.sin(dtheta / 2.0) * dphi).ravel()
        jj, ii = np.meshgrid(np.arange(nt), np.arange(nf), indexing="ij")
        antipode = ((nt - 1 - jj) * nf + (ii + nf // 2) % nf).ravel()
        return SphereGrid(
            dim=2,
            shape=(nt, nf),
            nodes=nodes,
            weights=weights,
            spacing=min(dtheta, dphi),
            theta=theta,
            phi=phi,
            antipode=antipode,
        )

    raise ValueError(f"dim must be 1 or 2, got {dim}")


def _extend_poles(grid: SphereGrid, f2: np.ndarray) -> np.ndarray:
    """Add ghost rows across the two poles: (theta<0, phi) <-> (-theta, phi+pi)."""
    nt, nf = grid.shape
    ext = np.empty((nt + 2, nf), dtype=f2.dtype)
    ext[1:-1] = f2
    half = nf // 2
    ext[0] = np.roll(f2[0], half)
    ext[-1] = np.roll(f2[-1], half)
    return ext


def _derivs_1d(grid: SphereGrid, f: np.ndarray):
    dt = grid.spacing
    fp = np.roll(f, -1)
    fm = np.roll(f, 1)
    return (fp - fm) / (2.0 * dt), (fp - 2.0 * f + fm) / dt**2


def _derivs_2d(grid: SphereGrid, f: np.ndarray):
    """Raw coordinate derivatives (f_t, f_tt, f_p, f_pp, f_tp) as 2-d arrays."""
    nt, nf = grid.shape
    dtheta = np.pi / nt
    dphi = 2.0 * np.pi / nf
    f2 = f.reshape(nt, nf)
    ext = _extend_poles(grid, f2)
    f_t = (ext[2:] - ext[:-2]) / (2.0 * dtheta)
    f_tt = (ext[2:] - 2.0 * f2 + ext[:-2]) / dtheta**2
    fp = np.roll(f2, -1, axis=1)
    fm = np.roll(f2, 1, axis=1)
    f_p = (fp - fm) / (2.0 * dphi)
    f_pp = (fp - 2.0 * f2 + fm) / dphi**2
    f_tp = (np.roll(f_t, -1, axis=1) - np.roll(f_t, 1, axis=1)) / (2.0 * dphi)
    return f_t, f_tt, f_p, f_pp, f_tp


def covariant_gradient(grid: SphereGrid, f: np.ndarray) -> np.ndarray:
    """Gradient of a scalar field in the orthonormal sphere frame.

    dim 1 -> (M,) array f_theta.
    dim 2 -> (M, 2) array (f_theta, f_phi / sin(theta)).
    """
    f = np.asarray(f, dtype=float)
    if grid.dim == 1:
        return _derivs_1d(grid, f)[0]
    f_t, _, f_p, _, _ = _derivs_2d(grid, f)
    st = np.sin(grid.theta).reshape(grid.shape)
    return np.stack([f_t.ravel(), (f_p / st).ravel()], axis=1)


def hessian_components(grid: SphereGrid, f: np.ndarray):
    """Orthonormal-frame covariant Hessian.

    dim 1 -> single array f_theta_theta.
    dim 2 -> (H_tt, H_tp, H_pp) with the round-metric Christoffel terms
    folded in:

        H_tt = f_tt
        H_tp = (f_tp - cot(theta) f_p) / sin(theta)
        H_pp = f_pp / sin(theta)^2 + cot(theta) f_t
    """
    f = np.asarray(f, dtype=float)
    if grid.dim == 1:
        return _derivs_1d(grid, f)[1]
    f_t, f_tt, f_p, f_pp, f_tp = _derivs_2d(grid, f)
    st = np.sin(grid.theta).reshape(grid.shape)
    ct = np.cos(grid.theta).reshape(grid.shape)
    cot = ct / st
    h_tt = f_tt
    h_tp = (f_tp - cot * f_p) / st
    h_pp = f_pp / st**2 + cot * f_t
    return h_tt.ravel(), h_tp.ravel(), h_pp.ravel()


def covariant_hessian(grid: SphereGrid, f: np.ndarray) -> np.ndarray:
    """Covariant Hessian as a symmetric matrix field.

    dim 1 -> (M,) scalar f_theta_theta.
    dim 2 -> (M, 2, 2) symmetric matrices in the orthonormal frame.
    """
    if grid.dim == 1:
        return hessian_components(grid, f)
    h_tt, h_tp, h_pp = hessian_components(grid, f)
    out = np.empty((grid.size, 2, 2))
    out[:, 0, 0] = h_tt
    out[:, 0, 1] = h_tp
    out[:, 1, 0] = h_tp
    out[:, 1, 1] = h_pp
    return out
