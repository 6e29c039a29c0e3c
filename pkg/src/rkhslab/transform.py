"""Linear integral transforms from feature maps, their adjoints, and identity checks.

A feature map ``h(t, p)`` over grids T and E induces the transform
``(LF)(p) = integral conj(h(t, p)) F(t) dm(t)``, its L2 adjoint
``(L* g)(t) = integral h(t, p) g(p) dp``, and the kernel
``K(p, q) = integral conj(h(t, p)) h(t, q) dm(t)``.  In the discretization
these are the matrices ``Hᴴ diag(m)``, ``H diag(w)`` and ``Hᴴ diag(m) H``,
and the operator identities (factorization, isometry, round-trip inversion)
become finite-dimensional residuals that this module measures.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInjectiveError, RangeViolationError
from .grid import DiscreteFunction, Grid, ensure_aligned, inner_product_l2, norm_l2
from .kernel import (
    DEFAULT_CUTOFF_REL,
    DEFAULT_RANGE_TOL,
    KernelMatrix,
    _solve_columns,
    condition_number,
    kernel_from_gram,
    solve_kernel_system,
)


@dataclass(frozen=True)
class FeatureMap:
    """Matrix of feature values ``matrix[k, i] = h(t_k, p_i)`` over T x E grids."""

    grid_T: Grid
    grid_E: Grid
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix)
        if not np.iscomplexobj(matrix):
            matrix = matrix.astype(float, copy=False)
        object.__setattr__(self, "matrix", matrix)
        expected = (self.grid_T.size, self.grid_E.size)
        if matrix.shape != expected:
            raise ValueError(f"feature matrix must be {expected}, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("feature matrix entries must be finite")


@dataclass
class TransformOperator:
    """A transform, its adjoint, and the induced kernel, all as dense matrices."""

    feature: FeatureMap
    forward_matrix: np.ndarray  # N x M, maps samples on T to samples on E
    adjoint_matrix: np.ndarray  # M x N, the weighted-L2 adjoint
    induced: KernelMatrix

    @property
    def grid_T(self) -> Grid:
        return self.feature.grid_T

    @property
    def grid_E(self) -> Grid:
        return self.feature.grid_E


@dataclass(frozen=True)
class InjectivityReport:
    injective: bool
    numerical_rank: int
    deficiency: int


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of the operator identities over seeded random trials.

    factorization_residual: relative Frobenius gap between the induced
    operator and forward∘adjoint.  roundtrip_error: worst relative error of
    adjoint∘inverse-kernel∘forward against the identity.  isometry_defect:
    worst defect of the space inner product against the source L2 product.
    norm_defect: worst relative gap between image space-norm and source norm.
    adjointness_defect: worst defect of the duality pairing between forward
    and adjoint.
    """

    factorization_residual: float
    roundtrip_error: float
    isometry_defect: float
    norm_defect: float
    adjointness_defect: float
    injective: bool
    numerical_rank: int
    condition_number: float
    trials: int
    seed: int
    cutoff_rel: float


@dataclass(frozen=True)
class InversionResult:
    recovered: DiscreteFunction
    range_residual: float


def build_transform(feature: FeatureMap) -> TransformOperator:
    """Assemble forward, adjoint and induced-kernel matrices from a feature map."""
    H = feature.matrix
    m = feature.grid_T.weights
    w = feature.grid_E.weights
    forward = H.conj().T * m[None, :]
    adjoint = H * w[None, :]
    induced = kernel_from_gram(forward @ H, feature.grid_E)
    return TransformOperator(
        feature=feature, forward_matrix=forward, adjoint_matrix=adjoint, induced=induced
    )


def apply_forward(op: TransformOperator, F: DiscreteFunction) -> DiscreteFunction:
    """Apply the transform to a function on grid T, yielding one on grid E."""
    ensure_aligned(F, op.grid_T)
    return DiscreteFunction(values=op.forward_matrix @ F.values, grid=op.grid_E)


def apply_adjoint(op: TransformOperator, g: DiscreteFunction) -> DiscreteFunction:
    """Apply the weighted-L2 adjoint to a function on grid E."""
    ensure_aligned(g, op.grid_E)
    return DiscreteFunction(values=op.adjoint_matrix @ g.values, grid=op.grid_T)


def check_injectivity(op: TransformOperator, tol_rank: float = 1e-10) -> InjectivityReport:
    """Numerical rank of the transform in orthonormal coordinates.

    The transform is injective iff the rank of
    ``diag(m)^{1/2} H diag(w)^{1/2}`` equals the size of grid T, i.e. the
    feature family is total in the source space.
    """
    sm = np.sqrt(op.grid_T.weights)
    sw = np.sqrt(op.grid_E.weights)
    scaled = sm[:, None] * op.feature.matrix * sw[None, :]
    singular_values = np.linalg.svd(scaled, compute_uv=False)
    if singular_values.size == 0 or singular_values[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(singular_values > tol_rank * singular_values[0]))
    m_dim = op.grid_T.size
    return InjectivityReport(
        injective=rank == m_dim, numerical_rank=rank, deficiency=m_dim - rank
    )


def _random_matrix(rng, rows, cols, complex_mode):
    mat = rng.standard_normal((rows, cols))
    if complex_mode:
        mat = mat + 1j * rng.standard_normal((rows, cols))
    return mat


def verify_identities(
    op: TransformOperator,
    cutoff_rel: float = DEFAULT_CUTOFF_REL,
    trials: int = 100,
    seed: int = 0,
) -> IdentityReport:
    """Measure every operator identity over seeded random trial functions.

    All residuals are relative.  The isometry and round-trip identities are
    meaningful only for injective transforms; the report records injectivity
    so callers can gate on it.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    H = op.feature.matrix
    m = op.grid_T.weights
    w = op.grid_E.weights
    complex_mode = np.iscomplexobj(H)

    # factorization: the induced operator equals forward @ adjoint up to roundoff
    lhs = op.induced.gram * w[None, :]
    rhs = op.forward_matrix @ op.adjoint_matrix
    lhs_norm = float(np.linalg.norm(lhs))
    factorization = (
        float(np.linalg.norm(lhs - rhs) / lhs_norm) if lhs_norm > 0 else 0.0
    )

    inj = check_injectivity(op)

    F = _random_matrix(rng, op.grid_T.size, trials, complex_mode)
    G = _random_matrix(rng, op.grid_T.size, trials, complex_mode)
    f_img = op.forward_matrix @ F
    g_img = op.forward_matrix @ G
    x, _ = _solve_columns(op.induced, f_img, cutoff_rel)

    norm_T = lambda mat: np.sqrt(np.sum(m[:, None] * np.abs(mat) ** 2, axis=0))
    f_norms = norm_T(F)
    g_norms = norm_T(G)

    back = op.adjoint_matrix @ x
    roundtrip = float(np.max(norm_T(back - F) / f_norms))

    # [LF, LG] via the solved K^{-1} LF against LG in the E-grid product
    space_inner = np.sum(w[:, None] * x * np.conj(g_img), axis=0)
    source_inner = np.sum(m[:, None] * F * np.conj(G), axis=0)
    isometry = float(np.max(np.abs(space_inner - source_inner) / (f_norms * g_norms)))

    image_norm_sq = np.sum(w[:, None] * x * np.conj(f_img), axis=0).real
    image_norms = np.sqrt(np.clip(image_norm_sq, 0.0, None))
    norm_defect = float(np.max(np.abs(image_norms - f_norms) / f_norms))

    # duality pairing (LF, g)_E == (F, L* g)_T on fresh random pairs
    g_rand = _random_matrix(rng, op.grid_E.size, trials, complex_mode)
    pair_lhs = np.sum(w[:, None] * (op.forward_matrix @ F) * np.conj(g_rand), axis=0)
    pair_rhs = np.sum(m[:, None] * F * np.conj(op.adjoint_matrix @ g_rand), axis=0)
    g_rand_norms = np.sqrt(np.sum(w[:, None] * np.abs(g_rand) ** 2, axis=0))
    adjointness = float(np.max(np.abs(pair_lhs - pair_rhs) / (f_norms * g_rand_norms)))

    return IdentityReport(
        factorization_residual=factorization,
        roundtrip_error=roundtrip,
        isometry_defect=isometry,
        norm_defect=norm_defect,
        adjointness_defect=adjointness,
        injective=inj.injective,
        numerical_rank=inj.numerical_rank,
        condition_number=condition_number(op.induced, cutoff_rel),
        trials=trials,
        seed=seed,
        cutoff_rel=cutoff_rel,
    )


def invert(
    op: TransformOperator,
    f: DiscreteFunction,
    cutoff_rel: float = DEFAULT_CUTOFF_REL,
    range_tol: float | None = DEFAULT_RANGE_TOL,
) -> InversionResult:
    """Recover the source function from transform data.

    Applies the adjoint composed with the inverse kernel operator, the left
    inverse of an injective transform.  The range residual
    ``||forward(F) - f|| / ||f||`` measures how far ``f`` sits from the
    transform range; above ``range_tol`` a ``RangeViolationError`` carries it.

    Raises ``NotInjectiveError`` when the transform fails the rank check.
    """
    ensure_aligned(f, op.grid_E)
    inj = check_injectivity(op)
    if not inj.injective:
        raise NotInjectiveError(inj.numerical_rank, op.grid_T.size)
    solved = solve_kernel_system(op.induced, f, cutoff_rel, range_tol=None)
    recovered = DiscreteFunction(
        values=op.adjoint_matrix @ solved.solution.values, grid=op.grid_T
    )
    f_norm = norm_l2(f)
    if f_norm == 0.0:
        residual = 0.0
    else:
        recon = apply_forward(op, recovered)
        diff = DiscreteFunction(values=recon.values - f.values, grid=op.grid_E)
        residual = norm_l2(diff) / f_norm
    if range_tol is not None and residual > range_tol:
        raise RangeViolationError(residual, range_tol)
    return InversionResult(recovered=recovered, range_residual=float(residual))
