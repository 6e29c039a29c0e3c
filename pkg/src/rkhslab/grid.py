"""Quadrature grids on real intervals and discrete functions living on them.

A ``Grid`` replaces an interval with points and positive quadrature weights,
so that every integral in the continuous formulas becomes a weighted sum.
A ``DiscreteFunction`` is a vector of complex samples tied to one grid.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError

QUADRATURE_RULES = ("trapezoid", "midpoint")

_grid_ids = itertools.count()


def _next_grid_id() -> str:
    return f"grid{next(_grid_ids)}"


@dataclass(frozen=True)
class Grid:
    """Strictly increasing points with positive quadrature weights.

    ``interval`` records the underlying interval ``(a, b)``; for the midpoint
    rule the endpoints themselves are not grid points.
    """

    points: np.ndarray
    weights: np.ndarray
    rule: str
    interval: tuple[float, float]
    grid_id: str = field(default_factory=_next_grid_id, compare=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        if points.ndim != 1 or points.size < 1:
            raise ValueError("grid needs a 1-d array with at least one point")
        if weights.shape != points.shape:
            raise ValueError("points and weights must have the same length")
        if points.size > 1 and not np.all(np.diff(points) > 0):
            raise ValueError("grid points must be strictly increasing")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
            raise ValueError("grid points and weights must be finite")
        if not np.all(weights > 0):
            raise ValueError("quadrature weights must be positive")
        if self.rule not in QUADRATURE_RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}")

    @property
    def size(self) -> int:
        return self.points.size

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class DiscreteFunction:
    """Complex (or real) samples aligned to a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.asarray(self.values)
        if not np.iscomplexobj(values):
            values = values.astype(float, copy=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size != self.grid.size:
            raise ValueError(
                f"function has {values.size} samples, grid has {self.grid.size} points"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("function samples must be finite (no NaN/Inf)")


def make_uniform_grid(
    a: float,
    b: float,
    n: int,
    rule: str = "trapezoid",
    density: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Grid:
    """Discretize ``[a, b]`` with ``n`` points of the given quadrature rule.

    ``density``, when given, is a strictly positive function multiplying the
    Lebesgue weights pointwise, realizing a measure ``density(t) dt``.
    Isolated zero samples (a density vanishing at an endpoint) are floored at
    machine epsilon relative to the largest sample.

    Raises ``ValueError`` for an empty interval (``a >= b``), a negative or
    non-finite density sample, or an identically zero density.
    """
    if not a < b:
        raise ValueError(f"invalid interval: need a < b, got [{a}, {b}]")
    n = int(n)
    if n < 1:
        raise ValueError("grid needs at least one point")
    if rule == "trapezoid":
        if n < 2:
            raise ValueError("trapezoid rule needs at least two points")
        points = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2
    elif rule == "midpoint":
        h = (b - a) / n
        points = a + h * (np.arange(n) + 0.5)
        weights = np.full(n, h)
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    if density is not None:
        dens = _sample_density(density, points)
        if not np.all(np.isfinite(dens)) or np.any(dens < 0) or not np.any(dens > 0):
            raise ValueError("non-positive density sample on the grid")
        # a density vanishing at isolated points (e.g. 2t at t=0) gets a
        # relative floor so quadrature weights stay strictly positive
        floor = np.finfo(float).eps * dens.max()
        weights = weights * np.maximum(dens, floor)
    return Grid(points=points, weights=weights, rule=rule, interval=(float(a), float(b)))


def _sample_density(density, points):
    try:
        dens = np.asarray(density(points), dtype=float)
        if dens.shape == points.shape:
            return dens
    except (TypeError, ValueError):
        pass
    return np.array([float(density(x)) for x in points])


def sample_function(grid: Grid, fn: Callable) -> DiscreteFunction:
    """Evaluate a callable on the grid points."""
    try:
        values = np.asarray(fn(grid.points))
        if values.shape != grid.points.shape:
            raise ValueError
    except (TypeError, ValueError):
        values = np.array([fn(x) for x in grid.points])
    return DiscreteFunction(values=values, grid=grid)


def ensure_aligned(f: DiscreteFunction, grid: Grid) -> None:
    """Raise ``GridMismatchError`` unless ``f`` lives on ``grid``.

    Identity is decided by grid id and length, never by comparing
    floating-point coordinates.
    """
    if f.grid.grid_id != grid.grid_id or f.values.size != grid.size:
        raise GridMismatchError(
            f"function on {f.grid.grid_id} (n={f.values.size}) is not aligned "
            f"to {grid.grid_id} (n={grid.size})"
        )


def inner_product_l2(f: DiscreteFunction, g: DiscreteFunction, grid: Grid | None = None) -> complex:
    """Weighted L2 inner product, conjugate-linear in the second argument.

    Returns ``sum_i w_i * f_i * conj(g_i)``.
    """
    if grid is None:
        grid = f.grid
    ensure_aligned(f, grid)
    ensure_aligned(g, grid)
    if g is f:
        # FMA in the complex multiply leaves dust in imag(z * conj(z));
        # the self product must come out exactly real and nonnegative
        vals = f.values
        sq = vals.real**2 + vals.imag**2 if np.iscomplexobj(vals) else vals * vals
        return complex(np.sum(grid.weights * sq))
    # grouping the sample product first keeps conjugate symmetry exact at
    # the bit level (elementwise products commute exactly)
    return complex(np.sum(grid.weights * (f.values * np.conj(g.values))))


def norm_l2(f: DiscreteFunction, grid: Grid | None = None) -> float:
    """Weighted L2 norm of ``f``."""
    if grid is None:
        grid = f.grid
    ensure_aligned(f, grid)
    return float(np.sqrt(np.sum(grid.weights * np.abs(f.values) ** 2)))
