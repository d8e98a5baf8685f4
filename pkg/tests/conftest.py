"""Shared fixtures: maps and orbit contexts reused across test modules."""

from __future__ import annotations

import sys

import pytest
from hypothesis import HealthCheck, settings

from unimodal_complexity.interval_dynamics import Dynamics, seed_nice_interval
from unimodal_complexity.presets import preset

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fib_map():
    return preset("fibonacci", 20_000).map


@pytest.fixture(scope="session")
def fib_dyn(fib_map):
    return Dynamics(fib_map, 20_000)


@pytest.fixture(scope="session")
def fib_seed(fib_map):
    return seed_nice_interval(fib_map)


@pytest.fixture(scope="session")
def wild_map():
    return preset("wild", 20_000).map


@pytest.fixture(scope="session")
def wild_dyn(wild_map):
    return Dynamics(wild_map, 20_000)


@pytest.fixture(scope="session")
def feig_map():
    return preset("feigenbaum", 20_000).map


@pytest.fixture(scope="session")
def feig_dyn(feig_map):
    return Dynamics(feig_map, 20_000)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion that ran."""
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(mod.line(number, results[number]))
