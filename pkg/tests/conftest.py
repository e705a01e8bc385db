"""Fixture condivise: sistemi di riferimento, decomposizioni e generatore casuale"""

import numpy as np
import pytest

from grad_halfspace.moment_system_builder import build_full3d, build_kramers3, build_reduced_couette
from helpers import analyzed


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def kramers():
    return analyzed(build_kramers3(1.0))


@pytest.fixture(scope="session")
def couette5():
    return analyzed(build_reduced_couette(5, 1.0))


@pytest.fixture(scope="session")
def full3():
    return analyzed(build_full3d(3, 1.0))


@pytest.fixture(scope="session")
def full5():
    return analyzed(build_full3d(5, 1.0))
