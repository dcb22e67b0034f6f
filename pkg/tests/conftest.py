import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from minnet.synthetic import pyramid

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def pyr():
    return pyramid()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
