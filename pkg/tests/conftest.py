import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chaplab.charmap import char_map
from chaplab.initial_data import InitialDataPair, builtin_scenario, constant
from chaplab.singularity import analyze

settings.register_profile(
    "chaplab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("chaplab")


@pytest.fixture(scope="session")
def cusp():
    return builtin_scenario("cusp-tanh")


@pytest.fixture(scope="session")
def point():
    return builtin_scenario("point-shape")


@pytest.fixture(scope="session")
def line1():
    return builtin_scenario("line-shape-1")


@pytest.fixture(scope="session")
def line2():
    return builtin_scenario("line-shape-2")


@pytest.fixture(scope="session")
def flat():
    """Lambda_- = -1, Lambda_+ = 1: rho = 1, u = 0 everywhere."""
    return InitialDataPair(constant(-1.0), constant(1.0), window=(-10.0, 10.0), name="constant-state")


@pytest.fixture(scope="session")
def cusp_report(cusp):
    return analyze(cusp)[0]


@pytest.fixture(scope="session")
def point_report(point):
    return analyze(point)[0]


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(scope="session", autouse=True)
def _warm_tables():
    for name in ("cusp-tanh", "point-shape"):
        char_map(builtin_scenario(name))
