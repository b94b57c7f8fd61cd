import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lane_emden.errors import DegenerateConstantsError, DomainError
from lane_emden.geometry import PointGeometry, constant_curvature_jet, flat_jet, flat_point
from lane_emden.moments import k_constant
from lane_emden.problem_setup import CriticalPair
from lane_emden.reduced import (compute_c1_c2, grid_search_t, multipeak_expansion,
                                predict_concentration, psi, theta_at_point, theta_threshold)

PAIR = CriticalPair(8, 1.4)


def test_c1_c2_formulas(p14_consts, p14_coeffs):
    c = p14_consts
    w = 1 / 2.4**2 + 1 / 3.0**2
    assert p14_coeffs.c2 == pytest.approx(4 * c.L1 * w, rel=1e-14)
    assert p14_coeffs.c1 == pytest.approx(c.L6 / 2.4 + c.L7 / 3.0 - w * c.L1, rel=1e-14)
    zero = compute_c1_c2(c, PAIR, alpha=0.0, beta=0.0)
    assert zero.c1 == 0.0 and zero.c2 == 0.0


@settings(max_examples=50, deadline=None)
@given(a=st.floats(1e-3, 10), b=st.floats(1e-3, 10))
def test_c2_positive(p14_consts, a, b):
    assert compute_c1_c2(p14_consts, PAIR, a, b).c2 > 0


def test_flat_unit_point(p14_consts, p14_coeffs):
    pt = flat_point(8, h=1.0, hess_a=np.eye(8))
    pred = predict_concentration(pt, p14_consts, p14_coeffs, PAIR, warn=False)
    K = k_constant(p14_consts, PAIR)
    assert pred.theta == pytest.approx(1.0 + K * 8 / (16 * p14_consts.L3), rel=1e-14)
    pt0 = flat_point(8, h=1.0)
    pred0 = predict_concentration(pt0, p14_consts, p14_coeffs, PAIR, warn=False)
    assert pred0.t_star == pytest.approx(p14_coeffs.c2 / p14_consts.L3, rel=1e-14)
    assert pred0.t_unscaled == pytest.approx(p14_coeffs.c2, rel=1e-14)
    assert not pred0.feasible and "singular" in pred0.reasons[0]


def test_t_star_minimizes_psi(p14_consts, p14_coeffs):
    pt = PointGeometry(constant_curvature_jet(8, 0.2), 1.5, np.zeros(8), -np.eye(8), 20.0)
    pred = predict_concentration(pt, p14_consts, p14_coeffs, PAIR, warn=False)
    assert pred.feasible and pred.t_star > 0
    f = lambda t: psi(t, None, pt, p14_consts, p14_coeffs, PAIR)
    t = pred.t_star
    assert f(t) < f(t * 1.01) and f(t) < f(t * 0.99)
    # derivative of Psi in t, relative to the slope it balances
    h = 1e-5 * t
    slope = (f(t + h) - f(t - h)) / (2 * h)
    assert abs(slope) <= 1e-6 * p14_consts.L3 * pred.theta
    assert pred.delta(0.01) == pytest.approx(math.sqrt(0.01 * t))


def test_eta_term(p14_consts, p14_coeffs):
    H = np.diag(np.linspace(-1, 1, 8))
    pt = PointGeometry(flat_jet(8), 2.0, np.zeros(8), H, 1.0)
    e = np.zeros(8)
    e[-1] = 0.5
    d = psi(1.0, e, pt, p14_consts, p14_coeffs, PAIR) - psi(1.0, None, pt, p14_consts, p14_coeffs, PAIR)
    assert d == pytest.approx(p14_consts.L1 * 0.25 / (8 * 2.0), rel=1e-12)
    with pytest.raises(DomainError):
        psi(0.0, None, pt, p14_consts, p14_coeffs, PAIR)
    with pytest.raises(DomainError):
        psi(1.0, np.zeros(3), pt, p14_consts, p14_coeffs, PAIR)


def test_infeasible_point(p14_consts, p14_coeffs):
    pt = PointGeometry(flat_jet(8), 1.0, np.zeros(8), -np.eye(8), 0.1)
    assert theta_at_point(pt, p14_consts, PAIR) < 0
    pred = predict_concentration(pt, p14_consts, p14_coeffs, PAIR, warn=False)
    assert not pred.feasible and pred.t_star is None and pred.t_unscaled is None
    assert pred.to_dict()["delta_table"] == []
    with pytest.raises(DomainError):
        pred.delta(0.01)


def test_hypothesis_failure_reported(p14_consts, p14_coeffs):
    pair = CriticalPair(6, 2.0)
    pt = PointGeometry(flat_jet(6), 1.0, np.zeros(6), np.eye(6), 100.0)
    pred = predict_concentration(pt, p14_consts, p14_coeffs, pair, warn=False)
    assert not pred.feasible and any("condition" in r for r in pred.reasons)


def test_degenerate_l3(p14_consts, p14_coeffs):
    c = dataclasses.replace(p14_consts, L3=0.0)
    with pytest.raises(DegenerateConstantsError):
        theta_threshold(flat_point(8), c, PAIR)


def test_discrepancy_warning(p14_consts, p14_coeffs):
    pt = PointGeometry(flat_jet(8), 1.0, np.zeros(8), np.eye(8), 1.0)
    with pytest.warns(UserWarning, match="differs"):
        predict_concentration(pt, p14_consts, p14_coeffs, PAIR)
    unit = dataclasses.replace(p14_consts, L3=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pred = predict_concentration(pt, unit, p14_coeffs, PAIR)
    assert not pred.discrepancy and pred.t_star == pred.t_unscaled


def test_grid_search(p14_consts, p14_coeffs):
    pt = PointGeometry(flat_jet(8), 1.0, np.zeros(8), np.eye(8), 3.0)
    pred = predict_concentration(pt, p14_consts, p14_coeffs, PAIR, warn=False)
    t, step = grid_search_t(pt, p14_consts, p14_coeffs, PAIR, pred.t_star / 100, pred.t_star * 100)
    assert abs(math.log(t / pred.t_star)) <= step
    with pytest.raises(DomainError):
        grid_search_t(pt, p14_consts, p14_coeffs, PAIR, 1.0, 0.5)


def test_multipeak(p14_consts, p14_coeffs):
    pt = PointGeometry(flat_jet(8), 1.5, np.zeros(8), np.eye(8), 2.0)
    one = multipeak_expansion([1.0], None, [pt], p14_consts, p14_coeffs, PAIR, 0.01)
    two = multipeak_expansion([1.0, 1.0], None, [pt, pt], p14_consts, p14_coeffs, PAIR, 0.01)
    assert two == pytest.approx(2 * one, rel=1e-15)
    lead = multipeak_expansion([1.0], None, [pt], p14_consts, p14_coeffs, PAIR, 0.0)
    assert lead == pytest.approx(1.5 * 2 / 8 * p14_consts.L1, rel=1e-15)
    with pytest.raises(DomainError):
        multipeak_expansion([1.0, 2.0], None, [pt], p14_consts, p14_coeffs, PAIR, 0.01)


def test_prediction_serializes(p14_consts, p14_coeffs):
    pt = PointGeometry(flat_jet(8), 1.0, np.zeros(8), -np.eye(8), 20.0)
    d = predict_concentration(pt, p14_consts, p14_coeffs, PAIR, warn=False).to_dict((0.04, 0.01))
    assert [row[0] for row in d["delta_table"]] == [0.04, 0.01]
    assert d["hypothesis"]["condition"] == "i" and d["t_discrepancy"]
