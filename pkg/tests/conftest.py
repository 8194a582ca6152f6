from __future__ import annotations

import contextlib

import pytest
from hypothesis import HealthCheck, settings

from discop.oracle import enumerate_instances, exhaustive_crosscheck

settings.register_profile("default", max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


# --------------------------------------------------------------------------
# the 4-point suite shared by the acceptance tests

SUITE_POINTS, SUITE_GRID = 4, (0, 1, 2)


@pytest.fixture(scope="session")
def suite_report():
    return exhaustive_crosscheck(SUITE_POINTS, SUITE_GRID)


@pytest.fixture(scope="session")
def suite_instances():
    return [inst for _, inst, ok in enumerate_instances(SUITE_POINTS, SUITE_GRID) if ok]


# --------------------------------------------------------------------------
# one pass/fail line per acceptance criterion

_RESULTS: dict = {}


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def record(number: int, title: str):
        _RESULTS[number] = (title, False)
        yield
        _RESULTS[number] = (title, True)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok = _RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
