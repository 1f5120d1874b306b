import numpy as np
import pytest

from liouq import GridSpec, make_gaussian_phase_space

SIGMA = 1.0 / np.sqrt(2.0)


@pytest.fixture
def grid64():
    return GridSpec(64, 8.0)


@pytest.fixture
def grid32():
    return GridSpec(32, 8.0)


@pytest.fixture
def gaussian64(grid64):
    return make_gaussian_phase_space(0.5, 0.3, SIGMA, SIGMA, grid64)
