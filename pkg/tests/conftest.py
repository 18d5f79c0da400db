import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))  # oracles

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

from arsim.chart import builtin_malaga_rwy13  # noqa: E402
from arsim.dynamics import GuidanceLimits, nominal_reference  # noqa: E402
from arsim.performance import default_model  # noqa: E402


@pytest.fixture(scope="session")
def chart():
    return builtin_malaga_rwy13()


@pytest.fixture(scope="session")
def limits():
    return GuidanceLimits()


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def reference(chart, limits):
    return nominal_reference(chart, limits)


def pytest_terminal_summary(terminalreporter):
    # criterion lines recorded by the acceptance suite, shown even without -s
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines = [mod.RESULTS[k] for k in sorted(mod.RESULTS)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
