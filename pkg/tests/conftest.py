import os
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("thorough", max_examples=2000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from stadia.simctl import load_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture
def head_on():
    return load_scenario(SCENARIOS / "head_on.yaml")


@pytest.fixture
def far_enemy():
    return load_scenario(SCENARIOS / "far_enemy.yaml")


@pytest.fixture
def track_stationary():
    return load_scenario(SCENARIOS / "track_stationary.yaml")


def with_guidance(s, **changes):
    return s.model_copy(update={"guidance": s.guidance.model_copy(update=changes)})


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
