import numpy as np
import pytest

from spdcone import random_spd, random_sparse_spd


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def spd_pair(rng, n, spread=1.5):
    return random_spd(n, rng, spread), random_spd(n, rng, spread)


def sparse_pair(rng, n, density=0.05):
    return random_sparse_spd(n, density, rng), random_sparse_spd(n, density, rng)
