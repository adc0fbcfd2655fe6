"""Shared fixtures: the bundled scenario runs are expensive, so one run of
each is computed per session and reused by the unit and acceptance tests."""

from __future__ import annotations

import time

import pytest

from salvosim import bundled_scenario_path, parse_scenario, run

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(num: int, passed: bool, detail: str) -> None:
    line = f"CRITERION {num}: {'PASS' if passed else 'FAIL'} - {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="session")
def scenario1():
    return parse_scenario(bundled_scenario_path("scenario1"))


@pytest.fixture(scope="session")
def scenario2():
    return parse_scenario(bundled_scenario_path("scenario2"))


@pytest.fixture(scope="session")
def scenario1_run(scenario1):
    start = time.perf_counter()
    result, telemetry = run(scenario1)
    elapsed = time.perf_counter() - start
    return result, telemetry, elapsed


@pytest.fixture(scope="session")
def scenario2_run(scenario2):
    result, telemetry = run(scenario2)
    return result, telemetry


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
