import numpy as np
import pytest

from semitrack import VehicleParams, assemble_flexible, assemble_rigid


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def rigid(params):
    return assemble_rigid(params)


@pytest.fixture(scope="session")
def flexible(params):
    return assemble_flexible(params)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
