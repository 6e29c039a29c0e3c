import math

import numpy as np
import pytest

import rkhslab as rl

FOURIER_BAND = 64 * math.pi


@pytest.fixture(scope="session")
def brownian_space():
    grid = rl.make_uniform_grid(0, 1, 200, "trapezoid")
    kernel = rl.assemble_kernel(rl.builtin_kernel("brownian"), grid)
    return rl.make_rkhs_space(kernel)


@pytest.fixture(scope="session")
def sinc_space():
    grid = rl.make_uniform_grid(0, 1, 200, "trapezoid")
    kernel = rl.assemble_kernel(rl.builtin_kernel("sinc", band=math.pi), grid)
    return rl.make_rkhs_space(kernel)


@pytest.fixture(scope="session")
def indicator_op():
    grid_E = rl.make_uniform_grid(0, 1, 200, "midpoint")
    grid_T = rl.make_uniform_grid(0, 1, 200, "midpoint")
    fm = rl.make_feature_map(rl.FeatureFamily("indicator"), grid_T, grid_E)
    return rl.build_transform(fm)


@pytest.fixture(scope="session")
def fourier_op():
    grid_E = rl.make_uniform_grid(0, 1, 64, "trapezoid")
    grid_T = rl.make_uniform_grid(-FOURIER_BAND, FOURIER_BAND, 64, "trapezoid")
    fm = rl.make_feature_map(rl.FeatureFamily("fourier", band=FOURIER_BAND), grid_T, grid_E)
    return rl.build_transform(fm)


@pytest.fixture(scope="session")
def orthonormal_op():
    grid_E = rl.make_uniform_grid(0, 1, 100, "trapezoid")
    grid_T = rl.make_uniform_grid(0, 1, 100, "trapezoid")
    fm = rl.make_feature_map(rl.FeatureFamily("orthonormal_diagonal"), grid_T, grid_E)
    return rl.build_transform(fm)


@pytest.fixture(scope="session")
def rank_one_op():
    grid_T = rl.make_uniform_grid(0, 1, 1, "midpoint")
    grid_E = rl.make_uniform_grid(0, 1, 200, "midpoint")
    fm = rl.FeatureMap(grid_T=grid_T, grid_E=grid_E, matrix=np.ones((1, 200)))
    return rl.build_transform(fm)


def random_range_function(kernel, rng, complex_mode=False):
    """A function guaranteed inside the numerical range of the kernel operator."""
    raw = rng.standard_normal(kernel.grid.size)
    if complex_mode:
        raw = raw + 1j * rng.standard_normal(kernel.grid.size)
    seed_fn = rl.DiscreteFunction(values=raw, grid=kernel.grid)
    return rl.apply_operator(kernel, seed_fn)
