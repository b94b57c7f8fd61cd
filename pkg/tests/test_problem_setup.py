import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from lane_emden.errors import DomainError
from lane_emden.problem_setup import (CriticalPair, DecayRegime, RegimeTag, check_theorem_hypotheses,
                                      classify_regime, conjugate_exponent, dual_exponents)


def test_conjugate_exponent_examples():
    assert conjugate_exponent(6, 2.0) == 2.0
    assert conjugate_exponent(8, 1.4) == pytest.approx(2.0, rel=1e-14)
    assert conjugate_exponent(8, 1.25) == pytest.approx(25 / 11, rel=1e-14)
    assert conjugate_exponent(10, 1.5) == 1.5


@pytest.mark.parametrize("N,p", [(2, 2.0), (8, -1.0), (8, 1.0 / 3.0), (3, 2.0)])
def test_conjugate_exponent_rejects(N, p):
    with pytest.raises(DomainError):
        conjugate_exponent(N, p)


@settings(max_examples=200, deadline=None)
@given(N=st.integers(3, 14), frac=st.floats(1e-6, 1.0))
def test_pair_lies_on_hyperbola(N, frac):
    crit = (N + 2) / (N - 2)
    p_lo = max(1.0, 2.0 / (N - 2))  # below 2/(N-2) there is no conjugate exponent
    p = p_lo + frac * (crit - p_lo)
    pair = CriticalPair(N, p)
    assert abs(1 / (pair.p + 1) + 1 / (pair.q + 1) - (N - 2) / N) < 1e-12
    assert pair.q >= crit - 1e-12


def test_swap_warns_and_moves_weights():
    with pytest.warns(UserWarning, match="swapping"):
        pair = CriticalPair(8, 2.0, 1.4, alpha=3.0, beta=5.0)
    assert (pair.p, pair.q, pair.alpha, pair.beta) == (1.4, 2.0, 5.0, 3.0)


@pytest.mark.parametrize("kwargs", [
    dict(N=8, p=0.5), dict(N=8, p=1.4, q=2.1), dict(N=8, p=1.4, alpha=0.0),
    dict(N=2, p=2.0), dict(N=8.5, p=1.4),
])
def test_invalid_pairs(kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(DomainError):
            CriticalPair(**kwargs)


def test_pair_round_trip():
    pair = CriticalPair(8, 1.25, alpha=0.5)
    assert CriticalPair.from_dict(pair.to_dict()) == pair
    assert not pair.symmetric and CriticalPair(6, 2.0).symmetric


def test_regimes():
    above = classify_regime(CriticalPair(8, 1.4))
    assert above.tag is RegimeTag.ABOVE and above.u_tail_exponent == -6 and not above.log_factor
    crit = classify_regime(CriticalPair(8, 4 / 3))
    assert crit.tag is RegimeTag.CRITICAL and crit.log_factor and crit.u_tail_exponent == -6
    below = classify_regime(CriticalPair(8, 1.25))
    assert below.tag is RegimeTag.BELOW
    assert below.u_tail_exponent == pytest.approx(-5.5) and below.v_tail_exponent == -6
    assert below.du_tail_exponent == pytest.approx(-6.5) and below.dv_tail_exponent == -7
    assert DecayRegime.from_dict(below.to_dict()) == below


def test_dual_exponents():
    pair = CriticalPair(8, 1.4)
    ps, qs = dual_exponents(pair)
    assert 1 / ps == pytest.approx(1.4 / 2.4 - 1 / 8, rel=1e-15)
    assert 1 / qs == pytest.approx(2 / 3 - 1 / 8, rel=1e-15)
    # the symmetric point is self-dual and equals the Sobolev-type exponent 2N/(N+2) inverse
    ps6, qs6 = dual_exponents(CriticalPair(6, 2.0))
    assert ps6 == qs6 == pytest.approx(2.0)


@pytest.mark.parametrize("N,p,cond", [
    (8, 1.4, "i"), (10, 1.5, "ii"), (8, 1.25, "iii"), (6, 2.0, None), (8, 4 / 3, None),
    (9, 9 / 7, None), (8, 5 / 3, None), (7, 1.5, None),
])
def test_hypotheses(N, p, cond):
    rep = check_theorem_hypotheses(CriticalPair(N, p))
    assert rep.condition == cond
    assert rep.satisfied == (cond is not None)
    assert rep.to_dict()["condition"] == cond


def test_finite_constants_flags():
    rep = check_theorem_hypotheses(CriticalPair(8, 1.4))
    assert rep.all_finite
    # N = 4: U V r^(N-1) ~ r^(-1) so L3 diverges
    rep4 = check_theorem_hypotheses(CriticalPair(4, 2.0))
    assert not rep4.finite_constants["L3"]
    assert not rep4.finite_constants["L2"]
    assert rep4.finite_constants["L1"]
    assert math.isfinite(rep4.finite_constants["L1"])
