import numpy as np
import pytest

from dvbgk import GridConfig, build_basis, build_grid


@pytest.fixture(scope="session")
def default_grid():
    # 64 x 16^3, v_max = 6: the desk-scale reference grid
    return build_grid(GridConfig())


@pytest.fixture(scope="session")
def default_basis(default_grid):
    return build_basis(default_grid)


@pytest.fixture(scope="session")
def small_grid():
    # same velocity resolution, minimal spatial extent: cheap for per-cell math
    return build_grid(GridConfig(spatial_points=8))


@pytest.fixture(scope="session")
def small_basis(small_grid):
    return build_basis(small_grid)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
