"""Kernel matrices, the discretized kernel operator, and its spectral pseudo-inverse.

The integral operator ``(Kf)(p) = integral K(p,q) f(q) dq`` discretizes to the
matrix ``gram @ diag(w)`` acting on sample vectors, where ``gram`` holds the
kernel values at grid points and ``w`` the quadrature weights.  All solves go
through the eigendecomposition of the symmetrized form
``S = sqrt(W) gram sqrt(W)``, with a relative eigenvalue cutoff standing in
for restriction to the operator range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonHermitianKernelError, RangeViolationError
from .grid import DiscreteFunction, Grid, ensure_aligned

#: relative Hermitian defect above which a kernel is rejected outright
HERMITIAN_REJECT_REL = 1e-6

#: default relative eigenvalue cutoff for pseudo-inverse solves
DEFAULT_CUTOFF_REL = 1e-12

#: default relative residual above which a solve reports a range violation
DEFAULT_RANGE_TOL = 1e-6


@dataclass
class KernelMatrix:
    """Hermitian matrix of kernel values over one grid.

    ``gram[i, j]`` holds ``K(p_i, p_j)``.  The matrix is symmetrized on
    construction and the pre-symmetrization defect is recorded.
    """

    grid: Grid
    gram: np.ndarray
    hermitian_defect: float
    _eigh_cache: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.grid.size


@dataclass(frozen=True)
class SpectralData:
    """Eigendecomposition of the weighted symmetric form, rank-truncated.

    Eigenvalues are sorted descending; eigenvector columns are orthonormal in
    the Euclidean product of the symmetrized form.  ``numerical_rank`` counts
    eigenvalues strictly above ``cutoff``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cutoff: float
    numerical_rank: int


@dataclass(frozen=True)
class PsdReport:
    passed: bool
    min_eigenvalue: float


@dataclass(frozen=True)
class SolveResult:
    solution: DiscreteFunction
    range_residual: float


def kernel_from_gram(gram: np.ndarray, grid: Grid) -> KernelMatrix:
    """Wrap a raw matrix of kernel values: validate, symmetrize, record defect."""
    gram = np.asarray(gram)
    if not np.iscomplexobj(gram):
        gram = gram.astype(float, copy=False)
    if gram.shape != (grid.size, grid.size):
        raise ValueError(f"gram must be {grid.size}x{grid.size}, got {gram.shape}")
    if not np.all(np.isfinite(gram)):
        raise ValueError("kernel produced non-finite values")
    defect = float(np.max(np.abs(gram - gram.conj().T)))
    scale = float(np.max(np.abs(gram)))
    if scale > 0 and defect > HERMITIAN_REJECT_REL * scale:
        raise NonHermitianKernelError(defect, scale)
    sym = 0.5 * (gram + gram.conj().T)
    if np.iscomplexobj(sym) and not np.any(sym.imag):
        sym = sym.real
    return KernelMatrix(grid=grid, gram=sym, hermitian_defect=defect)


def assemble_kernel(kfun: Callable, grid: Grid) -> KernelMatrix:
    """Evaluate ``kfun(p, q)`` on the grid's point pairs and build the matrix.

    ``kfun`` may be vectorized over arrays or a plain scalar function.  A
    Hermitian defect above ``HERMITIAN_REJECT_REL`` relative to the largest
    entry rejects the kernel as non-self-adjoint.
    """
    p = grid.points
    raw = _evaluate_pairwise(kfun, p)
    return kernel_from_gram(raw, grid)


def _evaluate_pairwise(kfun, p):
    try:
        raw = np.asarray(kfun(p[:, None], p[None, :]))
        if raw.shape == (p.size, p.size):
            return raw
    except (TypeError, ValueError):
        pass
    return np.array([[kfun(pi, qj) for qj in p] for pi in p])


def discrete_delta_kernel(grid: Grid) -> KernelMatrix:
    """Kernel whose operator is the identity: gram = diag(1 / weights).

    This is the discrete counterpart of the delta kernel, the unique matrix
    with ``sum_j gram[i, j] w_j f_j = f_i``.
    """
    return kernel_from_gram(np.diag(1.0 / grid.weights), grid)


def builtin_kernel(name: str, **params) -> Callable:
    """Named kernel functions used by tests and the CLI config.

    brownian: min(p, q); gaussian: exp(-(p-q)^2 / (2 l^2)); sinc:
    sin(b (p-q)) / (pi (p-q)); constant: fixed value (negative values give a
    deliberately non-PSD test kernel).
    """
    if name == "brownian":
        return lambda p, q: np.minimum(p, q)
    if name == "gaussian":
        ell = float(params.get("lengthscale", 0.2))
        if ell <= 0:
            raise ValueError("gaussian kernel needs lengthscale > 0")
        return lambda p, q: np.exp(-((p - q) ** 2) / (2.0 * ell * ell))
    if name == "sinc":
        band = float(params.get("band", math.pi))
        if band <= 0:
            raise ValueError("sinc kernel needs band > 0")
        return lambda p, q: (band / math.pi) * np.sinc(band * (p - q) / math.pi)
    if name == "constant":
        value = float(params.get("value", 1.0))
        return lambda p, q: np.full(np.broadcast_shapes(np.shape(p), np.shape(q)), value)
    raise ValueError(f"unknown built-in kernel {name!r}")


BUILTIN_KERNEL_NAMES = ("brownian", "gaussian", "sinc", "constant")


def _weighted_eigh(K: KernelMatrix):
    """Eigendecomposition of S = sqrt(W) gram sqrt(W), cached, descending order."""
    if K._eigh_cache is None:
        sw = np.sqrt(K.grid.weights)
        S = sw[:, None] * K.gram * sw[None, :]
        S = 0.5 * (S + S.conj().T)
        lam, U = np.linalg.eigh(S)
        order = np.arange(lam.size - 1, -1, -1)
        K._eigh_cache = (lam[order], U[:, order])
    return K._eigh_cache


def spectral_data(K: KernelMatrix, cutoff_rel: float = DEFAULT_CUTOFF_REL) -> SpectralData:
    """Spectral factorization with the rank cutoff ``cutoff_rel * lambda_max``."""
    if not 0 < cutoff_rel < 1:
        raise ValueError("cutoff_rel must lie in (0, 1)")
    lam, U = _weighted_eigh(K)
    lam_max = max(float(lam[0]), 0.0) if lam.size else 0.0
    cutoff = cutoff_rel * lam_max
    rank = int(np.count_nonzero(lam > cutoff))
    return SpectralData(
        eigenvalues=lam, eigenvectors=U, cutoff=cutoff, numerical_rank=rank
    )


def validate_psd(K: KernelMatrix, tol_psd: float) -> PsdReport:
    """Check nonnegative-definiteness of the weighted form.

    Passes iff the minimum eigenvalue of ``sqrt(W) gram sqrt(W)`` is at least
    ``-tol_psd``.
    """
    lam, _ = _weighted_eigh(K)
    min_eig = float(lam[-1])
    return PsdReport(passed=min_eig >= -tol_psd, min_eigenvalue=min_eig)


def condition_number(K: KernelMatrix, cutoff_rel: float = DEFAULT_CUTOFF_REL) -> float:
    """Ratio of the largest eigenvalue to the smallest one kept by the cutoff."""
    spec = spectral_data(K, cutoff_rel)
    if spec.numerical_rank == 0:
        return math.inf
    kept = spec.eigenvalues[: spec.numerical_rank]
    return float(kept[0] / kept[-1])


def apply_operator(K: KernelMatrix, f: DiscreteFunction) -> DiscreteFunction:
    """Apply the discretized integral operator: ``gram @ (w * f)``."""
    ensure_aligned(f, K.grid)
    return DiscreteFunction(values=K.gram @ (K.grid.weights * f.values), grid=K.grid)


def _solve_columns(K: KernelMatrix, rhs: np.ndarray, cutoff_rel: float):
    """Pseudo-inverse solve of ``gram @ W @ x = rhs`` for one or many columns.

    Returns ``(x, residuals)`` where the per-column residual is the relative
    weighted-L2 norm of the component of ``rhs`` outside the numerical range
    (the dropped spectral coefficients).
    """
    spec = spectral_data(K, cutoff_rel)
    lam, U = spec.eigenvalues, spec.eigenvectors
    rank = spec.numerical_rank
    sw = np.sqrt(K.grid.weights)
    single = rhs.ndim == 1
    cols = rhs[:, None] if single else rhs
    coeffs = U.conj().T @ (sw[:, None] * cols)
    total = np.linalg.norm(coeffs, axis=0)
    dropped = np.linalg.norm(coeffs[rank:, :], axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        residuals = np.where(total > 0, dropped / total, 0.0)
    filtered = np.zeros_like(coeffs)
    if rank > 0:
        filtered[:rank, :] = coeffs[:rank, :] / lam[:rank, None]
    x = (U @ filtered) / sw[:, None]
    if single:
        return x[:, 0], float(residuals[0])
    return x, residuals


def solve_kernel_system(
    K: KernelMatrix,
    f: DiscreteFunction,
    cutoff_rel: float = DEFAULT_CUTOFF_REL,
    range_tol: float | None = DEFAULT_RANGE_TOL,
) -> SolveResult:
    """Invert the kernel operator on its numerical range.

    Solves ``gram @ W @ x = f`` by spectral pseudo-inverse with eigenvalue
    threshold ``cutoff_rel * lambda_max``, the discrete form of applying the
    inverse operator on the quotient by the null space.  The reported range
    residual is ``||gram W x - f|| / ||f||`` in the weighted L2 norm.

    Raises ``RangeViolationError`` when the residual exceeds ``range_tol``
    (pass ``range_tol=None`` to report without raising).
    """
    ensure_aligned(f, K.grid)
    x, residual = _solve_columns(K, f.values, cutoff_rel)
    if range_tol is not None and residual > range_tol:
        raise RangeViolationError(residual, range_tol)
    return SolveResult(
        solution=DiscreteFunction(values=x, grid=K.grid), range_residual=residual
    )


def range_residual(K: KernelMatrix, f: DiscreteFunction, cutoff_rel: float = DEFAULT_CUTOFF_REL) -> float:
    """Relative weighted-L2 mass of ``f`` outside the numerical range of ``K``."""
    ensure_aligned(f, K.grid)
    spec = spectral_data(K, cutoff_rel)
    sw = np.sqrt(K.grid.weights)
    coeffs = spec.eigenvectors.conj().T @ (sw * f.values)
    total = float(np.linalg.norm(coeffs))
    if total == 0.0:
        return 0.0
    return float(np.linalg.norm(coeffs[spec.numerical_rank :]) / total)
