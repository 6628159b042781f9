import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hqorbit.hqspace import HQSpace

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def space():
    return HQSpace(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
