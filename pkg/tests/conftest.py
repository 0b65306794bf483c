import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pdregion.casestudy import case_systems

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# case-study parameters
TAU, K, M, D, T, C = 0.1, 0.5, 0.3, 0.5, 0.02, 0.1


@pytest.fixture(scope="session")
def systems():
    return case_systems()


@pytest.fixture(scope="session")
def G1(systems):
    return systems["g1"].scalar()


@pytest.fixture(scope="session")
def G2(systems):
    return systems["g2"].scalar()


@pytest.fixture(scope="session")
def G3(systems):
    return systems["g3"].scalar()


@pytest.fixture(scope="session")
def G4(systems):
    return systems["g4"]


def g3_edge(sigma):
    return float(np.sqrt((D - sigma) / (T * M)))
