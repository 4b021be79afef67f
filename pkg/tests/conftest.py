import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vhardy import Box, ExponentFunction, ScaleLadder

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def box():
    return Box.interval(-16.0, 16.0, 1024)


@pytest.fixture(scope="session")
def ladder(box):
    return ScaleLadder.for_box(box, 64)


@pytest.fixture(scope="session")
def p_capped(box):
    return ExponentFunction.from_preset("example-1-capped", box)


@pytest.fixture(scope="session")
def p_example(box):
    return ExponentFunction.from_preset("example-1", box)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
