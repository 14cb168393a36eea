import numpy as np
import pytest

from dpris import scenario as scen

WAVELENGTH = 0.0115
PITCH = WAVELENGTH / 3.0


@pytest.fixture(scope="session")
def table_scenario_16():
    """Default-parameter scenario shrunk to a 4x4 surface."""
    return scen.Scenario(elements=16)


@pytest.fixture(scope="session")
def model16(table_scenario_16):
    return scen.build_link_model(table_scenario_16)


@pytest.fixture(scope="session")
def oblique_scenario():
    """Feed raised toward +z at 0.1 m standoff (unequal polarizations)."""
    return scen.Scenario(elements=16, feed_r_m=0.1, feed_zenith_deg=60.0)


def complex_rng(seed):
    return np.random.default_rng(seed)
