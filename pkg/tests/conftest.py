import math

import numpy as np
import pytest

from riemannwave.numerics.evolution import WaveState
from riemannwave.numerics.jets import build_base_jets
from riemannwave.numerics.spectral import Grid, SpectralField
from riemannwave.utils.sampling import random_state


@pytest.fixture
def grid():
    return Grid(128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def state(grid, rng):
    return random_state(grid, rng)


@pytest.fixture
def jets(state):
    return build_base_jets(state, 4)


def mode(grid: Grid, k: int, amplitude: complex = 1.0) -> SpectralField:
    return SpectralField(grid, amplitude * np.exp(1j * k * grid.points * 2 * math.pi / grid.L))


@pytest.fixture
def single_mode(grid):
    """Z = alpha, Z_t = eps e^{i alpha}."""
    eps = 1e-2
    return eps, WaveState(0.0, SpectralField.zeros(grid), mode(grid, 1, eps))
