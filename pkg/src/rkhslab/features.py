"""Built-in feature-map families with known closed-form induced kernels.

Each family fixes ``h(t, p)`` so the induced kernel has an independent
closed form (or, for the orthonormal family, a diagonal operator), giving
ground truth for the identity checks:

* ``fourier``: ``exp(-i t p) / sqrt(2 pi)`` on a symmetric T, inducing the
  sinc kernel ``sin(b (p - q)) / (pi (p - q))``.
* ``indicator``: ``1_{t <= p}`` with T = E, inducing ``min(p, q) - a``.
* ``gaussian``: ``exp(-(t - p)^2 / (2 sigma^2))`` on a wide T, inducing
  ``sigma sqrt(pi) exp(-(p - q)^2 / (4 sigma^2))``.
* ``orthonormal_diagonal``: discretely orthonormal modes scaled so the
  induced operator is exactly diagonal (the weighted-L2 degenerate case).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid
from .transform import FeatureMap

FAMILY_NAMES = ("fourier", "indicator", "gaussian", "orthonormal_diagonal")

#: how much slack interval endpoints get in compatibility checks
_ENDPOINT_RTOL = 1e-9


@dataclass(frozen=True)
class FeatureFamily:
    """A family name plus its parameters.

    band: half-width of the symmetric T interval (fourier).
    sigma: feature width (gaussian).
    modes: required size of grid T (orthonormal_diagonal); optional.
    weight: target diagonal of the induced operator for orthonormal_diagonal,
        as a callable of the E points or an array; defaults to 1.
    """

    family: str
    band: float | None = None
    sigma: float | None = None
    modes: int | None = None
    weight: Callable | np.ndarray | None = None

    def __post_init__(self):
        if self.family not in FAMILY_NAMES:
            raise ValueError(f"unknown feature family {self.family!r}")
        if self.band is not None and self.band <= 0:
            raise ValueError("band must be positive")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.modes is not None and self.modes < 1:
            raise ValueError("mode count must be at least 1")
        if self.family == "gaussian" and self.sigma is None:
            raise ValueError("gaussian family needs sigma")


def recommended_t_interval(spec: FeatureFamily, interval_E: tuple[float, float]) -> tuple[float, float]:
    """Default T interval for a family, given the E interval.

    The gaussian window extends eight widths past E so the closed form for
    an unbounded T applies up to negligible truncation.
    """
    a, b = interval_E
    if spec.family == "fourier":
        if spec.band is None:
            raise ValueError("fourier family needs band to pick a T interval")
        return (-spec.band, spec.band)
    if spec.family == "gaussian":
        return (a - 8.0 * spec.sigma, b + 8.0 * spec.sigma)
    return (a, b)


def _close(x: float, y: float, scale: float) -> bool:
    return abs(x - y) <= _ENDPOINT_RTOL * max(scale, 1.0)


def make_feature_map(spec: FeatureFamily, grid_T: Grid, grid_E: Grid) -> FeatureMap:
    """Evaluate a family on a T x E grid pair.

    Raises ``ValueError`` for grids incompatible with the family (indicator
    needs T = E as intervals; fourier needs T symmetric about 0 and matching
    the band when one is given; orthonormal_diagonal needs T at least as
    large as E).
    """
    t = grid_T.points
    p = grid_E.points
    if spec.family == "indicator":
        ta, tb = grid_T.interval
        ea, eb = grid_E.interval
        span = max(abs(ta), abs(tb), abs(ea), abs(eb))
        if not (_close(ta, ea, span) and _close(tb, eb, span)):
            raise ValueError("indicator family needs T and E to be the same interval")
        H = (t[:, None] <= p[None, :]).astype(float)
        return FeatureMap(grid_T=grid_T, grid_E=grid_E, matrix=H)
    if spec.family == "fourier":
        ta, tb = grid_T.interval
        if not _close(ta, -tb, abs(tb)):
            raise ValueError("fourier family needs T symmetric about 0")
        if spec.band is not None and not _close(tb, spec.band, spec.band):
            raise ValueError(
                f"fourier band {spec.band} does not match T interval [{ta}, {tb}]"
            )
        H = np.exp(-1j * t[:, None] * p[None, :]) / math.sqrt(2.0 * math.pi)
        return FeatureMap(grid_T=grid_T, grid_E=grid_E, matrix=H)
    if spec.family == "gaussian":
        H = np.exp(-((t[:, None] - p[None, :]) ** 2) / (2.0 * spec.sigma**2))
        return FeatureMap(grid_T=grid_T, grid_E=grid_E, matrix=H)
    if spec.family == "orthonormal_diagonal":
        return _orthonormal_diagonal_map(spec, grid_T, grid_E)
    raise ValueError(f"unknown feature family {spec.family!r}")


def _orthonormal_diagonal_map(spec: FeatureFamily, grid_T: Grid, grid_E: Grid) -> FeatureMap:
    """Columns orthonormal in the T measure, scaled to a diagonal operator.

    With modes ``phi_i`` satisfying ``sum_k conj(phi_i) phi_j m_k = delta_ij``
    and column scales ``sqrt(v_i / w_i)``, the induced operator is exactly
    ``diag(v)``.
    """
    M, N = grid_T.size, grid_E.size
    if M < N:
        raise ValueError(
            f"orthonormal_diagonal needs grid T at least as large as grid E ({M} < {N})"
        )
    if spec.modes is not None and spec.modes != M:
        raise ValueError(f"mode count {spec.modes} does not match grid T size {M}")
    v = _diagonal_weight(spec, grid_E)
    # cosine modes, then QR in the sqrt(m)-scaled coordinates for exact
    # discrete orthonormality; column signs fixed for determinism
    k = np.arange(M, dtype=float)[:, None]
    j = np.arange(N, dtype=float)[None, :]
    base = np.cos(math.pi * j * (k + 0.5) / M)
    sm = np.sqrt(grid_T.weights)
    q, r = np.linalg.qr(sm[:, None] * base)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    phi = (q * signs[None, :]) / sm[:, None]
    H = phi * np.sqrt(v / grid_E.weights)[None, :]
    return FeatureMap(grid_T=grid_T, grid_E=grid_E, matrix=H)


def _diagonal_weight(spec: FeatureFamily, grid_E: Grid) -> np.ndarray:
    if spec.weight is None:
        return np.ones(grid_E.size)
    if callable(spec.weight):
        v = np.asarray(spec.weight(grid_E.points), dtype=float)
    else:
        v = np.asarray(spec.weight, dtype=float)
    if v.shape != grid_E.points.shape:
        raise ValueError("diagonal weight must match the E grid size")
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("diagonal weight must be strictly positive and finite")
    return v


def closed_form_kernel(spec: FeatureFamily, grid_T: Grid) -> Callable | None:
    """The family's analytically induced kernel, or None when there is none.

    The orthonormal family induces a distributional (diagonal) kernel with
    no pointwise closed form.
    """
    if spec.family == "indicator":
        a = grid_T.interval[0]
        return lambda p, q: np.minimum(p, q) - a
    if spec.family == "fourier":
        band = spec.band if spec.band is not None else grid_T.interval[1]
        return lambda p, q: (band / math.pi) * np.sinc(band * (p - q) / math.pi)
    if spec.family == "gaussian":
        sigma = spec.sigma
        return lambda p, q: sigma * math.sqrt(math.pi) * np.exp(
            -((p - q) ** 2) / (4.0 * sigma**2)
        )
    return None


def closed_form_discrepancy(spec: FeatureFamily, op) -> float | None:
    """Max absolute gap between the induced gram and the closed form on grid E."""
    kfun = closed_form_kernel(spec, op.grid_T)
    if kfun is None:
        return None
    p = op.grid_E.points
    exact = kfun(p[:, None], p[None, :])
    return float(np.max(np.abs(op.induced.gram - exact)))
