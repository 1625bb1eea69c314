from dataclasses import replace

import numpy as np
import pytest

from d2d_powergame.experiments import ScenarioSpec, generate_scenario
from d2d_powergame.model import NetworkScenario

ACCEPTANCE_LINES = []


@pytest.fixture
def two_user():
    """Symmetric pair sharing one receiver: h = (1, 1), noise 1e-3 W."""
    return NetworkScenario.from_gains([1.0, 1.0], noise_power=1e-3, p_max=0.1)


@pytest.fixture(scope="session")
def feasible_drops():
    """First ten default drops feasible for target 5."""
    spec = ScenarioSpec(feasible_for=5.0)
    return [generate_scenario(replace(spec, seed=s)) for s in range(10)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
