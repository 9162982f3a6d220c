import numpy as np
import pytest

from puppet.kinematics.model import load_model, planar_arm


@pytest.fixture(scope="session")
def panda():
    return load_model("panda_7dof")


@pytest.fixture()
def two_link():
    return planar_arm(1.0, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
