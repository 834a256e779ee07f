import numpy as np
import pytest

from symred import scenarios


@pytest.fixture(scope="session")
def so2_scenario():
    return scenarios.so2_planar()


@pytest.fixture(scope="session")
def so3_scenario():
    return scenarios.so3_angular()


@pytest.fixture(scope="session")
def nbody_scenario():
    return scenarios.translation_nbody()


@pytest.fixture(scope="session")
def pair_scenario():
    return scenarios.translation_nbody(n=2)


@pytest.fixture(scope="session")
def rigid_scenario():
    return scenarios.tstar_so3()


@pytest.fixture(scope="session")
def magnetic_scenario():
    return scenarios.magnetic_r2()


@pytest.fixture(scope="session")
def singular_scenario():
    return scenarios.so2_singular()


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
