import pytest
from hypothesis import HealthCheck, settings

from kleinshuffle.fuchsian import punctured_torus_group
from kleinshuffle.shuffle import build_gamma_k, build_gamma_k_tau, make_plan

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def torus():
    return punctured_torus_group()


@pytest.fixture(scope="session")
def plan3():
    return make_plan(3, 1)


@pytest.fixture(scope="session")
def gamma3(plan3):
    return build_gamma_k(plan3)


@pytest.fixture(scope="session")
def gamma3_tau(plan3, gamma3):
    return build_gamma_k_tau(plan3, (2, 1, 3), gamma_k=gamma3)
