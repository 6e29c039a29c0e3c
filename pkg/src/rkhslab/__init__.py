"""Reproducing-kernel Hilbert spaces on quadrature grids.

Build kernels from functions or feature maps, compute the kernel-space inner
product through the inverse kernel operator, and verify the operator
identities (reproducing property, factorization, isometry, inversion,
weighted-L2 degeneracy) at finite scale.
"""

from .analysis import (
    UnitaryInversionReport,
    WeightedL2Verdict,
    check_unitary_inversion,
    check_weighted_l2,
)
from .errors import (
    ConfigError,
    GridMismatchError,
    NonHermitianKernelError,
    NotInjectiveError,
    RangeViolationError,
    RkhsLabError,
)
from .features import (
    FeatureFamily,
    closed_form_discrepancy,
    closed_form_kernel,
    make_feature_map,
    recommended_t_interval,
)
from .grid import (
    DiscreteFunction,
    Grid,
    inner_product_l2,
    make_uniform_grid,
    norm_l2,
    sample_function,
)
from .kernel import (
    KernelMatrix,
    PsdReport,
    SolveResult,
    SpectralData,
    apply_operator,
    assemble_kernel,
    builtin_kernel,
    condition_number,
    discrete_delta_kernel,
    kernel_from_gram,
    solve_kernel_system,
    spectral_data,
    validate_psd,
)
from .rkhs import (
    PointEvalBound,
    RkhsSpace,
    SectionProjection,
    check_reproducing,
    kernel_section,
    make_rkhs_space,
    point_eval_bound,
    project_onto_sections,
    reproducing_residuals,
    rkhs_inner,
    rkhs_norm,
)
from .transform import (
    FeatureMap,
    IdentityReport,
    InjectivityReport,
    InversionResult,
    TransformOperator,
    apply_adjoint,
    apply_forward,
    build_transform,
    check_injectivity,
    invert,
    verify_identities,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DiscreteFunction",
    "FeatureFamily",
    "FeatureMap",
    "Grid",
    "GridMismatchError",
    "IdentityReport",
    "InjectivityReport",
    "InversionResult",
    "KernelMatrix",
    "NonHermitianKernelError",
    "NotInjectiveError",
    "PointEvalBound",
    "PsdReport",
    "RangeViolationError",
    "RkhsLabError",
    "RkhsSpace",
    "SectionProjection",
    "SolveResult",
    "SpectralData",
    "TransformOperator",
    "UnitaryInversionReport",
    "WeightedL2Verdict",
    "apply_adjoint",
    "apply_forward",
    "apply_operator",
    "assemble_kernel",
    "build_transform",
    "builtin_kernel",
    "check_injectivity",
    "check_reproducing",
    "check_unitary_inversion",
    "check_weighted_l2",
    "closed_form_discrepancy",
    "closed_form_kernel",
    "condition_number",
    "discrete_delta_kernel",
    "inner_product_l2",
    "invert",
    "kernel_from_gram",
    "kernel_section",
    "make_feature_map",
    "make_rkhs_space",
    "make_uniform_grid",
    "norm_l2",
    "point_eval_bound",
    "project_onto_sections",
    "recommended_t_interval",
    "reproducing_residuals",
    "rkhs_inner",
    "rkhs_norm",
    "sample_function",
    "solve_kernel_system",
    "spectral_data",
    "validate_psd",
    "verify_identities",
]
