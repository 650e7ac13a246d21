"""zollforge: star-shaped sphere deformations carrying families of closed
curves that are critical for length in a conformal-type metric.

The package provides a spectral engine on the sphere, the equator/tangent
field machinery, the area and first-variation densities, a generalized Funk
transform with a right inverse on even functions, the linearized operators,
a smoothed-Newton continuation solver, a verified catalog of equivariant odd
harmonic polynomials, and curvature formulas for the resulting star-shaped
embeddings.
"""

import os as _os

_threads = _os.environ.get("ZOLLFORGE_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _threads)

from .errors import (
    CatalogIntegrityError,
    ConfigurationError,
    DomainError,
    GraphValidityError,
    InvertibilityError,
    NonConvergenceError,
    NumericalError,
    SingularityError,
    SolvabilityError,
    ZollforgeError,
)
from .sphere import (
    OrthogonalTransform,
    SphereFunction,
    SphereGrid,
    sh_index,
    standard_grid,
)
from .equators import (
    CircleFunction,
    DirectionGrid,
    EquatorFrame,
    TangentField,
    center_map,
    dual_hypersurface,
    equator_frame,
    graph_point,
    project_zero_center,
    restrict,
    standard_directions,
    variational_vector,
)
from .area import (
    Jet,
    J,
    dJ,
    area,
    density_Q,
    density_T,
    euler_lagrange,
    normal_derivative,
)
from .funk import (
    FunkKernelMatrix,
    ProjectiveFunction,
    curve_intersections,
    dual_funk,
    eigencheck_table,
    funk,
    funk_matrix,
    kernel_K,
    legendre_at_zero,
    operator_L,
    right_inverse_R,
)
from .linearized import (
    LinearizedState,
    dH_in_psi_at_zero,
    jacobi_solve,
    operator_P,
    operator_S,
    phi_of_f,
)
from .solver import (
    SolutionState,
    SolverConfig,
    ZollReport,
    approx_right_inverse_V,
    continuation,
    equivariance_check,
    export_embedding,
    hamilton_iterate,
    lambda_map,
    linear_deviation_order,
    verify_zoll,
)
from .embedding import (
    HessianProfile,
    StarShapedSurface,
    embed,
    first_variation_H,
    first_variation_shape,
    hessian_multiplicity,
    induced_metric,
    mean_curvature,
    shape_operator,
    unit_normal,
)
from .polynomials import (
    GOLDEN_RATIO,
    GOLDEN_RATIO_INV,
    GoldenRational,
    Polynomial,
    complex_power_parts,
)
from .symmetry import (
    CatalogEntry,
    F_polynomial,
    FiniteGroup,
    H_polynomial,
    PowerSumCriticalSet,
    SimplexFrame,
    StabilizerReport,
    axial_conjugation,
    axial_rotation,
    build_catalog,
    build_group,
    catalog_entry,
    critical_points_powersum,
    form_product_invariance,
    invariant_polynomial,
    is_invariant,
    poly_laplacian,
    power_sum_polynomial,
    restrict_to_sphere,
    simplex_frame,
    stabilizer_verify,
    two_root_check,
    type_iii_group,
    vandermonde_polynomial,
    vtilde_polynomial,
)

__version__ = "0.1.0"

__all__ = [
    "CatalogIntegrityError",
    "ConfigurationError",
    "DomainError",
    "GraphValidityError",
    "InvertibilityError",
    "NonConvergenceError",
    "NumericalError",
    "SingularityError",
    "SolvabilityError",
    "ZollforgeError",
    "OrthogonalTransform",
    "SphereFunction",
    "SphereGrid",
    "sh_index",
    "standard_grid",
    "CircleFunction",
    "DirectionGrid",
    "EquatorFrame",
    "TangentField",
    "center_map",
    "dual_hypersurface",
    "equator_frame",
    "graph_point",
    "project_zero_center",
    "restrict",
    "standard_directions",
    "variational_vector",
    "Jet",
    "J",
    "dJ",
    "area",
    "density_Q",
    "density_T",
    "euler_lagrange",
    "normal_derivative",
    "FunkKernelMatrix",
    "ProjectiveFunction",
    "curve_intersections",
    "dual_funk",
    "eigencheck_table",
    "funk",
    "funk_matrix",
    "kernel_K",
    "legendre_at_zero",
    "operator_L",
    "right_inverse_R",
    "LinearizedState",
    "dH_in_psi_at_zero",
    "jacobi_solve",
    "operator_P",
    "operator_S",
    "phi_of_f",
    "SolutionState",
    "SolverConfig",
    "ZollReport",
    "approx_right_inverse_V",
    "continuation",
    "equivariance_check",
    "export_embedding",
    "hamilton_iterate",
    "lambda_map",
    "linear_deviation_order",
    "verify_zoll",
    "HessianProfile",
    "StarShapedSurface",
    "embed",
    "first_variation_H",
    "first_variation_shape",
    "hessian_multiplicity",
    "induced_metric",
    "mean_curvature",
    "shape_operator",
    "unit_normal",
    "GOLDEN_RATIO",
    "GOLDEN_RATIO_INV",
    "GoldenRational",
    "Polynomial",
    "complex_power_parts",
    "CatalogEntry",
    "F_polynomial",
    "FiniteGroup",
    "H_polynomial",
    "PowerSumCriticalSet",
    "SimplexFrame",
    "StabilizerReport",
    "axial_conjugation",
    "axial_rotation",
    "build_catalog",
    "build_group",
    "catalog_entry",
    "critical_points_powersum",
    "form_product_invariance",
    "invariant_polynomial",
    "is_invariant",
    "poly_laplacian",
    "power_sum_polynomial",
    "restrict_to_sphere",
    "simplex_frame",
    "stabilizer_verify",
    "two_root_check",
    "type_iii_group",
    "vandermonde_polynomial",
    "vtilde_polynomial",
    "__version__",
]
