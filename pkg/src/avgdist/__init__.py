"""Exact evaluation and numerical minimisation of the penalised average-distance
energy  E(P) = int_P dist(x, dP)^p dx + lam * perimeter(P) / area(P)  over convex
polygons, with verification tools for its inequalities and identities."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    ConvexPolygon,
    Degenerate,
    EmptyOrUnbounded,
    ErosionProfile,
    GeometryError,
    NotConvex,
    OutsidePolygon,
    boundary_distance,
    erode,
    erosion_profile,
    from_support_samples,
    hausdorff_distance,
    make_polygon,
    measures,
    random_convex_polygon,
    regular_polygon,
    shape_metrics,
    sym_diff_area,
)
from .energy import (  # noqa: E402
    EnergyBreakdown,
    EnergyParams,
    OutsideExponentWindow,
    ParameterError,
    avg_dist_integral,
    avg_dist_mc,
    disk_energy,
    energy,
    optimal_scale,
    rescale_optimally,
)
from .optimizer import (  # noqa: E402
    OptimizationConfig,
    OptimizationResult,
    chord_cut,
    corner_cut,
    curvature_diagnostic,
    minimize,
    project_to_feasible,
)
from .verification import (  # noqa: E402
    CheckReport,
    ConstantSearchResult,
    check_area_bound,
    check_claim1,
    check_optimality_identities,
    corner_rate_experiment,
    run_suite,
    search_constant,
)
