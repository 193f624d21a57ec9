import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tanlip.registry import builtin_domains

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def domains():
    return builtin_domains()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
