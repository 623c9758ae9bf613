from __future__ import annotations

import itertools

import numpy as np
import pytest

from fullcorr.scenario import Scenario


# filled by test_acceptance.report and echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


def naive_omega_coefficient(s, r, m, k):
    """Coefficient of P([sum r]_k = r | s) read straight off the two-case definition of Omega."""
    total = sum(s)
    q = total // m
    if total % m == 0:
        return (r - q) % k
    if total % m == 1:
        return (q - r) % k
    return 0


def naive_general_coefficient(table, s, r, m, k):
    total = sum(s)
    return table[total % m][(r - total // m) % k]


def all_settings(n, m):
    return itertools.product(range(m), repeat=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[(2, 2, 2), (2, 3, 2), (2, 2, 3), (3, 2, 2), (3, 3, 2), (3, 2, 3)])
def small_scenario(request):
    return Scenario(*request.param)
