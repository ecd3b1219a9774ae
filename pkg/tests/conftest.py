import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lpboltz.state import VelocityGrid, mixture

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BIMODAL = [(0.5, [1.5, 0.0], 0.6), (0.5, [-1.5, 0.3], 0.8)]


@pytest.fixture(scope="session")
def grid24():
    return VelocityGrid(2, 24, 8.0)


@pytest.fixture(scope="session")
def grid32():
    return VelocityGrid(2, 32, 8.0)


@pytest.fixture(scope="session")
def bimodal32(grid32):
    return mixture(BIMODAL, grid32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
