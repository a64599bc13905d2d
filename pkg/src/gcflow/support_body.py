"""Convex bodies represented by their support function on a sphere grid.

All static geometry lives here: the principal-radii matrix
(second covariant derivative of S plus S times the round metric), Gauss and
mean curvature, enclosed volume, surface area, widths, inner/outer radius
bounds, and the Euclidean embedding of the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateHull, NonConvex, NonPositiveSupport
from .sphere_domain import SphereGrid, hessian_components, covariant_gradient, make_grid

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class SupportField:
    """Support function values sampled on a SphereGrid.  Immutable."""

    grid: SphereGrid
    values: np.ndarray  # (M,) strictly positive
    label: str = ""

    @property
    def n(self) -> int:
        """Hypersurface dimension (1 for curves in the plane, 2 for surfaces)."""
        return self.grid.dim


def new_field(grid: SphereGrid, values, label: str = "") -> SupportField:
    """Construct a SupportField, re-centering if the origin lies outside.

    Raises NonPositiveSupport when even the centered body fails S > 0.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.shape != (grid.size,):
        raise ValueError(f"expected {grid.size} values, got {values.shape}")
    body = SupportField(grid, values, label)
    if np.min(values) <= 0.0:
        body = recenter(body)
        if np.min(body.values) <= 0.0:
            raise NonPositiveSupport(
                f"support function not positive after re-centering "
                f"(min {np.min(body.values):.3e})"
            )
    return body


# ---------------------------------------------------------------------------
# principal radii and curvature


def principal_radii(body: SupportField):
    """Eigen-structure of the radii matrix, vectorized over nodes.

    Returns (eig_min, eig_max, det, trace).  For dim 1 the matrix is a
    scalar and all four arrays coincide apart from det = trace = the value.
    """
    grid, s = body.grid, body.values
    if grid.dim == 1:
        r = hessian_components(grid, s) + s
        return r, r, r, r
    h_tt, h_tp, h_pp = hessian_components(grid, s)
    a = h_tt + s
    c = h_pp + s
    b = h_tp
    mean = 0.5 * (a + c)
    disc = np.sqrt((0.5 * (a - c)) ** 2 + b**2)
    return mean - disc, mean + disc, a * c - b * b, a + c


def convexity_threshold(body: SupportField) -> float:
    # below this radii-matrix eigenvalue the body is rejected, not regularized
    return 1e-10 * float(np.max(body.values)) ** 2


def is_strictly_convex(body: SupportField) -> bool:
    emin = principal_radii(body)[0]
    return bool(np.min(emin) > convexity_threshold(body))


def require_convex(body: SupportField):
    """Return principal_radii(body), raising NonConvex on failure."""
    pr = principal_radii(body)
    emin = pr[0]
    worst = int(np.argmin(emin))
    if emin[worst] <= convexity_threshold(body):
        raise NonConvex(worst, emin[worst])
    return pr


@dataclass(frozen=True)
class CurvatureSummary:
    """Per-node curvature data plus the radii matrix eigen-structure."""

    radii_matrix: np.ndarray  # (M,) dim 1 / (M,2,2) dim 2
    rm_eig_min: np.ndarray
    rm_eig_max: np.ndarray
    K: np.ndarray  # Gauss curvature
    H: np.ndarray  # mean curvature
    reverse_trace: np.ndarray  # sum of principal radii
    lam_min: np.ndarray  # smallest principal curvature per node
    lam_max: np.ndarray  # largest principal curvature per node
    A2: np.ndarray  # sum of squared principal curvatures

    @property
    def K_min(self) -> float:
        return float(np.min(self.K))

    @property
    def K_max(self) -> float:
        return float(np.max(self.K))

    @property
    def H_max(self) -> float:
        return float(np.max(self.H))


def curvature_summary(body: SupportField) -> CurvatureSummary:
    """Gauss/mean curvature and principal curvatures from the radii matrix."""
    grid = body.grid
    emin, emax, det, trace = require_convex(body)
    if grid.dim == 1:
        rm = det.copy()
    else:
        h_tt, h_tp, h_pp = hessian_components(grid, body.values)
        s = body.values
        rm = np.empty((grid.size, 2, 2))
        rm[:, 0, 0] = h_tt + s
        rm[:, 0, 1] = h_tp
        rm[:, 1, 0] = h_tp
        rm[:, 1, 1] = h_pp + s
    k = 1.0 / det
    lam_min = 1.0 / emax
    lam_max = 1.0 / emin
    if grid.dim == 1:
        h = lam_max
        a2 = lam_max**2
    else:
        h = lam_min + lam_max
        a2 = lam_min**2 + lam_max**2
    return CurvatureSummary(
        radii_matrix=rm,
        rm_eig_min=emin,
        rm_eig_max=emax,
        K=k,
        H=h,
        reverse_trace=trace,
        lam_min=lam_min,
        lam_max=lam_max,
        A2=a2,
    )


# ---------------------------------------------------------------------------
# integral functionals


def volume(body: SupportField) -> float:
    """Enclosed volume, (1/(n+1)) * sum of w * S / K."""
    det = require_convex(body)[2]
    n = body.n
    return float(np.sum(body.grid.weights * body.values * det) / (n + 1))


def area(body: SupportField) -> float:
    """Boundary measure (perimeter for dim 1), sum of w / K."""
    det = require_convex(body)[2]
    return float(np.sum(body.grid.weights * det))


# ---------------------------------------------------------------------------
# widths and radii


def width(body: SupportField, node: int) -> float:
    """Extent of the body in the direction of the given node: S(z) + S(-z)."""
    return float(body.values[node] + body.values[body.grid.antipode[node]])


def width_extremes(body: SupportField):
    w = body.values + body.values[body.grid.antipode]
    return float(np.min(w)), float(np.max(w))


def centroid(body: SupportField) -> np.ndarray:
    """Quadrature-weighted centroid of the embedded boundary."""
    x = embed(body)
    w = body.grid.weights
    return (w[:, None] * x).sum(axis=0) / np.sum(w)


def recenter(body: SupportField) -> SupportField:
    """Translate the origin to the embedding centroid: S -= <c, z>."""
    c = centroid(body)
    return replace(body, values=body.values - body.grid.nodes @ c)


def radii(body: SupportField):
    """(lower bound on inner radius, upper bound on outer radius).

    Reported as min/max support of the re-centered body; these bracket the
    true inner/outer radii but are not exact Chebyshev radii.
    """
    require_convex(body)
    centered = recenter(body)
    return float(np.min(centered.values)), float(np.max(centered.values))


# ---------------------------------------------------------------------------
# embedding and its inverse


def embed(body: SupportField) -> np.ndarray:
    """Boundary points X(z) = S(z) z + grad S(z), one per node."""
    grid, s = body.grid, body.values
    g = covariant_gradient(grid, s)
    if grid.dim == 1:
        th = grid.theta
        e_t = np.stack([-np.sin(th), np.cos(th)], axis=1)
        return s[:, None] * grid.nodes + g[:, None] * e_t
    th, ph = grid.theta, grid.phi
    st, ct = np.sin(th), np.cos(th)
    e_t = np.stack([ct * np.cos(ph), ct * np.sin(ph), -st], axis=1)
    e_p = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=1)
    return s[:, None] * grid.nodes + g[:, 0:1] * e_t + g[:, 1:2] * e_p


def brute_force_support(points: np.ndarray, grid: SphereGrid) -> SupportField:
    """Support function of a point cloud: S(z) = max_i <z, p_i>.

    Cross-validation oracle for embed(); raises DegenerateHull when the
    cloud has no interior (zero width in some direction).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != grid.dim + 1:
        raise ValueError(f"expected (P, {grid.dim + 1}) point array")
    if points.shape[0] < grid.dim + 2:
        raise ValueError(f"need at least {grid.dim + 2} points")
    s = np.max(grid.nodes @ points.T, axis=1)
    if np.min(s + s[grid.antipode]) <= 1e-9 * np.max(np.abs(s)):
        raise DegenerateHull("point cloud has (near) zero width in some direction")
    return new_field(grid, s, label="brute-force support")


# ---------------------------------------------------------------------------
# constructors


@dataclass(frozen=True)
class BodySpec:
    """Parametric description of an initial body.

    kind:   "sphere" | "ellipsoid" | "perturbed_sphere"
    radius: sphere / perturbation base radius
    radii:  ellipsoid semi-axes, length dim+1
    modes:  perturbation modes (k, amplitude); k > 0 is cos(k theta) on S^1
            and the zonal degree-k harmonic on S^2, k < 0 is sin(|k| theta)
            on S^1 and the sectoral degree-|k| harmonic sin^|k|(theta)
            cos(|k| phi) on S^2.  Degrees up to 4.
    """

    kind: str
    radius: float = 1.0
    radii: tuple = ()
    modes: tuple = ()


# explicit polynomial forms of the zonal harmonics P_k(cos theta)
_ZONAL = {
    1: lambda u: u,
    2: lambda u: 0.5 * (3.0 * u**2 - 1.0),
    3: lambda u: 0.5 * (5.0 * u**3 - 3.0 * u),
    4: lambda u: 0.125 * (35.0 * u**4 - 30.0 * u**2 + 3.0),
}


def harmonic(grid: SphereGrid, k: int) -> np.ndarray:
    """Perturbation basis function for mode index k (see BodySpec.modes)."""
    if k == 0 or abs(k) > 4 and grid.dim == 2:
        raise ValueError(f"unsupported mode index {k}")
    if grid.dim == 1:
        return np.cos(k * grid.theta) if k > 0 else np.sin(-k * grid.theta)
    if k > 0:
        return _ZONAL[k](np.cos(grid.theta))
    m = -k
    return np.sin(grid.theta) ** m * np.cos(m * grid.phi)


def sphere(grid: SphereGrid, r: float) -> SupportField:
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return new_field(grid, np.full(grid.size, float(r)), label=f"sphere r={r}")


def ellipsoid(grid: SphereGrid, semi_axes) -> SupportField:
    """Ellipsoid with the given semi-axes: S^2 = sum of r_i^2 z_i^2."""
    ax = np.asarray(semi_axes, dtype=float)
    if ax.shape != (grid.dim + 1,) or np.any(ax <= 0.0):
        raise ValueError(f"need {grid.dim + 1} positive semi-axes")
    s = np.sqrt((grid.nodes**2 * ax**2).sum(axis=1))
    return new_field(grid, s, label=f"ellipsoid {tuple(ax)}")


def perturbed_sphere(grid: SphereGrid, r: float, modes) -> SupportField:
    """Sphere of radius r plus harmonic perturbations; must stay convex."""
    s = np.full(grid.size, float(r))
    for k, amp in modes:
        s = s + amp * harmonic(grid, int(k))
    body = new_field(grid, s, label=f"perturbed sphere r={r} modes={list(modes)}")
    require_convex(body)
    return body


def make_body(spec: BodySpec, grid: SphereGrid) -> SupportField:
    if spec.kind == "sphere":
        return sphere(grid, spec.radius)
    if spec.kind == "ellipsoid":
        return ellipsoid(grid, spec.radii)
    if spec.kind == "perturbed_sphere":
        return perturbed_sphere(grid, spec.radius, spec.modes)
    raise ValueError(f"unknown body kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# snapshot files


def save_snapshot(path, body: SupportField, alpha: float | None = None,
                  time: float | None = None):
    """Write the body to JSON.  Values are in theta-major node order."""
    doc = {
        "version": SNAPSHOT_VERSION,
        "dim": body.grid.dim,
        "resolution": list(body.grid.shape),
        "values": body.values.tolist(),
    }
    if alpha is not None:
        doc["alpha"] = float(alpha)
    if time is not None:
        doc["time"] = float(time)
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_snapshot(path):
    """Read a snapshot; returns (body, metadata dict)."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {doc.get('version')}")
    res = doc["resolution"]
    grid = make_grid(doc["dim"], res[0] if doc["dim"] == 1 else res)
    body = new_field(grid, np.asarray(doc["values"], dtype=float))
    meta = {k: doc[k] for k in ("alpha", "time") if k in doc}
    return body, meta
