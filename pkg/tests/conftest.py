import os

import pytest
from hypothesis import settings

from fanno_periodic import GasModel
from fanno_periodic.config import loads

settings.register_profile("default", max_examples=100, deadline=None)
settings.register_profile("ci", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def air():
    return GasModel(1.4)


@pytest.fixture(scope="session")
def coarse_config():
    """Desk physics on a coarse grid, for fast pipeline tests."""
    return loads("duct.n_x = 65\ntime.n_t = 32\nharness.windows = 6\n")


@pytest.fixture(scope="session")
def fixed_point_config():
    return loads(
        "duct.n_x = 65\ntime.n_t = 32\n"
        "boundary.G1.terms =\nboundary.G2.terms =\nboundary.G3.terms =\n"
    )
