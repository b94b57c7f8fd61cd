import math

import numpy as np
import pytest

from lane_emden.errors import DomainError
from lane_emden.ground_state import rescale_profile
from lane_emden.moments import (NAMES, compute_moments, energy_identity, integrability_precheck,
                                integrand_exponents, k_constant, sphere_area)
from lane_emden.problem_setup import CriticalPair, classify_regime

# high-precision quadrature of the analytic N = 6 integrands
ORACLE_N6 = {
    "L1": 7143.8461471410785684,
    "L2": 685809.23012554354257,
    "L3": 71438.461471410785684,
    "L4": 257178.46129707882846,
    "L5": 257178.46129707882846,
    "L6": -11192.025630521023091,
    "L7": -11192.025630521023091,
}


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(6) == pytest.approx(math.pi**3)


@pytest.mark.parametrize("which", ["closed", "sym6"])
def test_closed_form_oracle(which, request):
    consts = compute_moments(request.getfixturevalue(which))
    for k in NAMES:
        assert getattr(consts, k) == pytest.approx(ORACLE_N6[k], rel=1e-6), k


def test_energy_identity_all_pairs(solved):
    for name, prof in solved.items():
        a, b, c = energy_identity(prof)
        assert a == pytest.approx(b, rel=1e-4) and a == pytest.approx(c, rel=1e-4), name


def test_l1_equals_energy(p14, p14_consts):
    a, _, _ = energy_identity(p14)
    assert p14_consts.L1 == pytest.approx(a, rel=1e-10)


def test_scale_covariance(p14, p14_consts):
    lam = 1.7
    sc = compute_moments(rescale_profile(p14, lam))
    assert sc.L1 == pytest.approx(p14_consts.L1, rel=1e-10)
    for k in ("L2", "L3", "L4", "L5"):
        assert getattr(sc, k) == pytest.approx(getattr(p14_consts, k) * lam**-2, rel=1e-10), k
    assert sc.normalization["scale"] == lam


def test_diagnostics(p14_consts):
    for k in NAMES:
        assert 0 <= p14_consts.tail_fractions[k] < 1e-2
        assert p14_consts.est_error[k] <= 1e-6 * abs(getattr(p14_consts, k))
    assert set(p14_consts.to_dict()) >= set(NAMES) | {"provenance", "normalization"}
    assert len(p14_consts.provenance["profile_hash"]) == 64


def test_sign_record(p14_consts):
    # under U(0) = 1 both logarithmic moments are negative
    assert p14_consts.L6 < 0 and p14_consts.L7 < 0
    assert all(getattr(p14_consts, k) > 0 for k in ("L1", "L2", "L3", "L4", "L5"))


def test_critical_and_below_regimes_finite(pcrit, p125):
    for prof in (pcrit, p125):
        c = compute_moments(prof)
        assert all(math.isfinite(getattr(c, k)) for k in NAMES)
        assert k_constant(c, prof.pair) > 0


def test_integrability():
    reg = classify_regime(CriticalPair(8, 1.4))
    ex = integrand_exponents(reg, 8, 1.4, 2.0)
    assert ex["L1"] == -7 and ex["L3"] == -5
    assert all(integrability_precheck(reg, 8).values())
    reg4 = classify_regime(CriticalPair(4, 2.0))
    flags = integrability_precheck(reg4, 4)
    assert not flags["L3"] and flags["L1"]


def test_divergent_constants_raise(solve):
    prof = solve(4, 2.0, r_max=1e3)
    with pytest.raises(DomainError, match="L2, L3"):
        compute_moments(prof)


def test_node_doubling(p14_consts, solve):
    fine = compute_moments(solve(8, 1.4, nodes_per_decade=80))
    for k in NAMES:
        assert getattr(fine, k) == pytest.approx(getattr(p14_consts, k), rel=1e-4), k


def test_k_constant(p14_consts):
    pair = CriticalPair(8, 1.4)
    K = k_constant(p14_consts, pair)
    assert K == pytest.approx(p14_consts.L2 - p14_consts.L4 / 2.4 - p14_consts.L5 / 3.0)
    assert np.isfinite(K)
