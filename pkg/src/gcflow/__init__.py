"""Power-of-Gauss-curvature flow of strictly convex bodies, formulated on
the Gauss sphere through the support function."""

from .sphere_domain import SphereGrid, make_grid, covariant_gradient, covariant_hessian
from .support_body import (
    BodySpec,
    CurvatureSummary,
    SupportField,
    area,
    brute_force_support,
    curvature_summary,
    ellipsoid,
    embed,
    is_strictly_convex,
    load_snapshot,
    make_body,
    new_field,
    perturbed_sphere,
    radii,
    recenter,
    save_snapshot,
    sphere,
    volume,
    width,
    width_extremes,
)
from .flow_engine import (
    FlowState,
    RescaledState,
    eta,
    make_flow,
    make_rescaled,
    physical_rhs,
    rescale_snapshot,
    run_rescaled,
    run_to_extinction,
    stable_dt,
    step_physical,
    step_rescaled,
    tau_of_t,
)
from .rescaler import apply_scaling, scaling_exponents
from .diagnostics import (
    BoundMonitor,
    DiagnosticsRecord,
    bound_suite,
    integral_quantity,
    make_record,
    monotonicity_report,
    pinching,
    self_similar_residual,
    shape_distance,
)
from .oracles import SphereSolution, dense_functional, ellipse_curvature, sphere_radius

__version__ = "0.1.0"
