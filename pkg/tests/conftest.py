"""Shared profiles and the acceptance summary hook."""
from __future__ import annotations

import warnings

import pytest

from lane_emden.ground_state import ShootingOptions, closed_form_profile, solve_ground_state
from lane_emden.moments import compute_moments
from lane_emden.problem_setup import CriticalPair
from lane_emden.reduced import compute_c1_c2

ACCEPTANCE: dict = {}


def _solve(N, p, **opts):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return solve_ground_state(CriticalPair(N, p), ShootingOptions(**opts))


@pytest.fixture(scope="session")
def closed():
    return closed_form_profile()


@pytest.fixture(scope="session")
def sym6():
    return _solve(6, 2.0)


@pytest.fixture(scope="session")
def p14():
    return _solve(8, 1.4)


@pytest.fixture(scope="session")
def p125():
    return _solve(8, 1.25)


@pytest.fixture(scope="session")
def pcrit():
    return _solve(8, 4.0 / 3.0)


@pytest.fixture(scope="session")
def sym10():
    return _solve(10, 1.5)


@pytest.fixture(scope="session")
def solved(sym6, p14, p125, pcrit, sym10):
    return {"N6 sym": sym6, "N8 p1.4": p14, "N8 p1.25": p125, "N8 crit": pcrit, "N10 sym": sym10}


@pytest.fixture(scope="session")
def p14_consts(p14):
    return compute_moments(p14)


@pytest.fixture(scope="session")
def p14_coeffs(p14, p14_consts):
    return compute_c1_c2(p14_consts, p14.pair)


@pytest.fixture(scope="session")
def solve():
    return _solve


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
