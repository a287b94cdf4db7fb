import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gshalf.distribution import BeamComponent, Distribution
from gshalf.representation import Scenario

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def bunch_scenario():
    """Free-streaming Gaussian bunch approaching the wall, electrostatic start."""
    comp = BeamComponent(1.0, (0.0, 0.0, 1.5), (0.5, 0.0, -0.75), 0.25)
    return Scenario(Distribution((comp,)), initial_field_mode="electrostatic", horizon=1.0)


@pytest.fixture
def empty_scenario():
    return Scenario(Distribution(()), horizon=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
