"""The kernel-induced Hilbert space: inner product, reproducing checks, projections.

The space inner product is ``[f, g] = (K^{-1} f, g)`` in the weighted L2
product, with the inverse realized by the spectral pseudo-inverse of the
kernel operator.  Every identity here is checkable at finite scale: the
reproducing identity, the point-evaluation bound, and least-squares
projections onto finite spans of kernel sections.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RangeViolationError
from .grid import DiscreteFunction, ensure_aligned, inner_product_l2
from .kernel import (
    DEFAULT_CUTOFF_REL,
    DEFAULT_RANGE_TOL,
    KernelMatrix,
    SpectralData,
    range_residual,
    solve_kernel_system,
    spectral_data,
)


@dataclass
class RkhsSpace:
    """A kernel matrix together with its spectral data and solve thresholds."""

    kernel: KernelMatrix
    spectral: SpectralData
    cutoff_rel: float
    range_tol: float

    @property
    def grid(self):
        return self.kernel.grid


@dataclass(frozen=True)
class PointEvalBound:
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class SectionProjection:
    coefficients: np.ndarray
    residual_norm: float
    rank_deficient: bool


def make_rkhs_space(
    kernel: KernelMatrix,
    cutoff_rel: float = DEFAULT_CUTOFF_REL,
    range_tol: float = DEFAULT_RANGE_TOL,
) -> RkhsSpace:
    return RkhsSpace(
        kernel=kernel,
        spectral=spectral_data(kernel, cutoff_rel),
        cutoff_rel=cutoff_rel,
        range_tol=range_tol,
    )


def kernel_section(space: RkhsSpace, q_index: int) -> DiscreteFunction:
    """The kernel section K(., q) at grid index ``q_index``."""
    n = space.grid.size
    if not 0 <= q_index < n:
        raise IndexError(f"index {q_index} out of range for grid of size {n}")
    return DiscreteFunction(values=space.kernel.gram[:, q_index].copy(), grid=space.grid)


def rkhs_inner(space: RkhsSpace, f: DiscreteFunction, g: DiscreteFunction) -> complex:
    """Inner product ``(K^{-1} f, g)`` in the weighted L2 product.

    Both arguments must lie in the numerical range of the kernel operator;
    otherwise ``RangeViolationError`` is raised.
    """
    ensure_aligned(g, space.grid)
    g_res = range_residual(space.kernel, g, space.cutoff_rel)
    if g_res > space.range_tol:
        raise RangeViolationError(g_res, space.range_tol)
    solved = solve_kernel_system(space.kernel, f, space.cutoff_rel, space.range_tol)
    return inner_product_l2(solved.solution, g, space.grid)


def rkhs_norm(space: RkhsSpace, f: DiscreteFunction) -> float:
    """Norm induced by the space inner product; clamps tiny negative roundoff."""
    return float(np.sqrt(max(rkhs_inner(space, f, f).real, 0.0)))


def check_reproducing(space: RkhsSpace, f: DiscreteFunction, q_index: int) -> float:
    """Residual of the reproducing identity at one grid index.

    Returns ``|[f, K(., q)] - f(q)| / (1 + |f(q)|)``.
    """
    section = kernel_section(space, q_index)
    value = rkhs_inner(space, f, section)
    fq = complex(f.values[q_index])
    return abs(value - fq) / (1.0 + abs(fq))


def reproducing_residuals(space: RkhsSpace, f: DiscreteFunction) -> np.ndarray:
    """Reproducing residuals at every grid index with a single solve.

    ``[f, K(., q)]`` over all q equals ``gram @ (w * K^{-1} f)``, so one
    pseudo-inverse solve plus one operator application covers the whole grid.
    """
    solved = solve_kernel_system(space.kernel, f, space.cutoff_rel, space.range_tol)
    recon = space.kernel.gram @ (space.grid.weights * solved.solution.values)
    return np.abs(recon - f.values) / (1.0 + np.abs(f.values))


def point_eval_bound(space: RkhsSpace, f: DiscreteFunction, q_index: int) -> PointEvalBound:
    """Check ``|f(q)| <= ||f|| * sqrt(K(q, q))`` at one grid index.

    ``sqrt(K(q, q))`` is the space norm of the kernel section at q, so this
    is the Cauchy-Schwarz bound for point evaluation.
    """
    n = space.grid.size
    if not 0 <= q_index < n:
        raise IndexError(f"index {q_index} out of range for grid of size {n}")
    ensure_aligned(f, space.grid)
    lhs = float(np.abs(f.values[q_index]))
    kqq = float(space.kernel.gram[q_index, q_index].real)
    rhs = rkhs_norm(space, f) * np.sqrt(max(kqq, 0.0))
    return PointEvalBound(lhs=lhs, rhs=float(rhs), holds=lhs <= rhs * (1.0 + 1e-10))


def project_onto_sections(
    space: RkhsSpace, indices, f: DiscreteFunction
) -> SectionProjection:
    """Best approximation of ``f`` from the span of kernel sections at ``indices``.

    The space-norm least-squares problem reduces, via the reproducing
    identity, to the linear system ``G_sub @ X = f[indices]`` with ``G_sub``
    the kernel submatrix at the chosen indices.  A numerically singular
    submatrix falls back to a reduced-rank least-squares solve and sets
    ``rank_deficient``.
    """
    ensure_aligned(f, space.grid)
    idx = np.asarray(list(indices), dtype=int)
    if idx.size == 0:
        raise ValueError("need at least one section index")
    if np.unique(idx).size != idx.size:
        raise ValueError("section indices must be distinct")
    if idx.min() < 0 or idx.max() >= space.grid.size:
        raise IndexError("section index out of range")
    g_sub = space.kernel.gram[np.ix_(idx, idx)]
    rhs = f.values[idx]
    coeffs, _, rank, _ = np.linalg.lstsq(g_sub, rhs, rcond=1e-12)
    rank_deficient = rank < idx.size
    residual = f.values - space.kernel.gram[:, idx] @ coeffs
    res_fn = DiscreteFunction(values=residual, grid=space.grid)
    # the residual of an in-range f stays in range; skip the range gate so
    # roundoff-level residual vectors do not trip it
    solved = solve_kernel_system(space.kernel, res_fn, space.cutoff_rel, range_tol=None)
    res_sq = inner_product_l2(solved.solution, res_fn, space.grid).real
    return SectionProjection(
        coefficients=coeffs,
        residual_norm=float(np.sqrt(max(res_sq, 0.0))),
        rank_deficient=bool(rank_deficient),
    )
