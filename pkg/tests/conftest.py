import pytest
from hypothesis import HealthCheck, settings

import maghaptics as mh

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# Symmetric push-pull drive: bottom triplet forward, top triplet reversed.
PUSH_PULL = (1.6, 1.6, 1.6, -1.6, -1.6, -1.6)


@pytest.fixture(scope="session")
def stack():
    return mh.CoilStack()


@pytest.fixture(scope="session")
def magnet():
    return mh.MagnetSpec()


@pytest.fixture(scope="session")
def fmap(stack, magnet):
    return mh.build_map(stack.coil, magnet)
