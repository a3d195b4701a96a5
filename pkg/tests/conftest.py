import math

import pytest

import autopark
from autopark.scenario import Scenario


@pytest.fixture(scope="session")
def default_scenario():
    return autopark.load_scenario("default")


@pytest.fixture(scope="session")
def vehicle_params(default_scenario):
    return default_scenario.build_vehicle()


@pytest.fixture()
def scenario_raw(default_scenario):
    """Deep-copied manifest for tests that tweak the configuration."""
    return default_scenario.manifest()


def make_scenario(raw: dict) -> Scenario:
    return Scenario(raw)


@pytest.fixture(scope="session")
def posture_controller(default_scenario):
    return default_scenario.build_posture()


@pytest.fixture(scope="session")
def turn_controller(default_scenario):
    return default_scenario.build_turn()


@pytest.fixture(scope="session")
def decider(default_scenario):
    return default_scenario.build_decider()


def five_term_peaks(family):
    """Map label -> peak position for a membership family."""
    return dict(zip(family.labels, family.breakpoints))


@pytest.fixture(scope="session")
def deg():
    return math.radians
