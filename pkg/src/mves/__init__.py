"""Blind hyperspectral unmixing by simplex volume minimization.

The package estimates endmember spectra as the vertices of the
minimum-volume simplex enclosing the pixel cloud, measures how pure the
underlying abundances are, and ships an executable check suite for the
identifiability theory of the criterion (recovery is guaranteed above the
uniform-purity threshold ``1/sqrt(n-1)`` and impossible at or below it).
"""

from .datagen import Scene, SceneConfig, generate_scene, load_spectral_library
from .errors import (
    AffineDimensionError,
    DegenerateSimplexError,
    DimensionError,
    DomainError,
    InternalConsistencyError,
    MvesError,
    PurityCapError,
    SingularMatrixError,
    ValidationError,
)
from .geometry import (
    AffineChart,
    PolyhedralSimplex,
    Simplex,
    canonical_abundance_chart,
    contains,
    fit_data_chart,
    rotate_in_chart,
    simplex_volume,
    to_polyhedral,
    to_vertices,
)
from .lp import LinearProgram, LpSolution, in_convex_hull, solve_lp
from .metrics import AngleErrorReport, rms_angle_error
from .purity import (
    EdgePixelSpec,
    PurityReport,
    alpha_star,
    best_purity,
    conv_p_membership,
    edge_pixels,
    gamma_lower_bound,
    identifiability_threshold,
    in_region_r,
    purity_report,
    theorem5_bound,
)
from .solver import (
    MvesConfig,
    MvesResult,
    initialize_simplex,
    solve_mves,
    solve_mves_runs,
    tangency_points,
)

__version__ = "0.1.0"

__all__ = [
    "AffineChart",
    "AffineDimensionError",
    "AngleErrorReport",
    "DegenerateSimplexError",
    "DimensionError",
    "DomainError",
    "EdgePixelSpec",
    "InternalConsistencyError",
    "LinearProgram",
    "LpSolution",
    "MvesConfig",
    "MvesError",
    "MvesResult",
    "PolyhedralSimplex",
    "PurityCapError",
    "PurityReport",
    "Scene",
    "SceneConfig",
    "Simplex",
    "SingularMatrixError",
    "ValidationError",
    "alpha_star",
    "best_purity",
    "canonical_abundance_chart",
    "contains",
    "conv_p_membership",
    "edge_pixels",
    "fit_data_chart",
    "gamma_lower_bound",
    "generate_scene",
    "identifiability_threshold",
    "in_convex_hull",
    "in_region_r",
    "initialize_simplex",
    "load_spectral_library",
    "purity_report",
    "rms_angle_error",
    "rotate_in_chart",
    "simplex_volume",
    "solve_lp",
    "solve_mves",
    "solve_mves_runs",
    "tangency_points",
    "theorem5_bound",
    "to_polyhedral",
    "to_vertices",
]
