import math

import numpy as np
import pytest

from lane_emden.bubble import (BubbleParams, ValidationTable, cutoff, energy_quadrature, eval_bubble,
                               eval_kernel_element, expansion_validation, kernel_gram)
from lane_emden.errors import DomainError, QuadratureError
from lane_emden.geometry import PointGeometry, constant_curvature_jet, flat_jet, flat_point
from lane_emden.ground_state import evaluate_profile
from lane_emden.moments import k_constant

N = 8


def test_cutoff_properties():
    r0 = 2.0
    rho = np.linspace(0, 3, 3001)
    chi, dchi = cutoff(rho, r0)
    assert np.all(chi[rho <= 1.0] == 1.0) and np.all(chi[rho >= 2.0] == 0.0)
    assert np.all((chi >= 0) & (chi <= 1))
    fd = np.gradient(chi, rho)
    assert np.max(np.abs(fd - dchi)) < 1e-4


def test_bubble_values(p14):
    eta = np.zeros(N)
    eta[0] = 0.3
    par = BubbleParams(0.05, eta, 1.0)
    W, H = eval_bubble(p14, par, 0.05 * eta)
    eu, ev = N / 3.0, N / 2.4
    assert W == pytest.approx(0.05**-eu) and H == pytest.approx(0.05**-ev * p14.V[0])
    W, H = eval_bubble(p14, par, np.full(N, 1.0))
    assert W == 0.0 and H == 0.0


def test_kernel_elements(p14):
    par = BubbleParams(0.1, np.zeros(N), 1.0)
    y = np.zeros(N)
    y[2] = 0.05
    U, V, dU, dV = evaluate_profile(p14, 0.5)
    P, F = eval_kernel_element(p14, 3, par, y)
    assert P == pytest.approx(0.1 ** (-N / 3) * dU)
    assert eval_kernel_element(p14, 1, par, y) == (0.0, 0.0)
    P0, _ = eval_kernel_element(p14, 0, par, y)
    assert P0 == pytest.approx(0.1 ** (-N / 3) * (0.5 * dU + N / 3 * U))
    with pytest.raises(DomainError):
        eval_kernel_element(p14, N + 1, par, y)


def test_kernel_gram_structure(p14):
    G = kernel_gram(p14)
    assert G.shape == (N + 1, N + 1)
    assert np.all(np.diag(G) > 0)
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off)) < 1e-10 * np.max(np.diag(G))
    assert np.allclose(np.diag(G)[1:], G[1, 1], rtol=1e-12)


def test_eps_zero_limit(p14, p14_consts):
    J = energy_quadrature(p14, BubbleParams(0.1, np.zeros(N), 40.0), flat_point(N, h=0.0, r0=40.0), p14.pair, 0.0)
    assert J == pytest.approx(2 / N * p14_consts.L1, rel=1e-6)


def test_rotation_and_translation_invariance(p14):
    pt = flat_point(N, h=1.0, r0=40.0)
    Q, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(N, N)))
    par = BubbleParams(0.2, np.zeros(N), 40.0)
    J0 = energy_quadrature(p14, par, pt, p14.pair, 0.04)
    assert energy_quadrature(p14, par, pt, p14.pair, 0.04, frame=Q) == pytest.approx(J0, rel=1e-10)
    eta = np.zeros(N)
    eta[0] = 0.5
    J1 = energy_quadrature(p14, BubbleParams(0.1, eta, 40.0), pt, p14.pair, 0.01)
    J2 = energy_quadrature(p14, BubbleParams(0.1, np.zeros(N), 40.0), pt, p14.pair, 0.01)
    assert J1 == pytest.approx(J2, rel=1e-10)
    with pytest.raises(DomainError):
        energy_quadrature(p14, par, pt, p14.pair, 0.04, frame=2 * Q)


def test_curvature_shift(p14, p14_consts):
    K = k_constant(p14_consts, p14.pair)
    r0 = 6.0
    pk = PointGeometry(constant_curvature_jet(N, 1.0, r0), 1.0, np.zeros(N), np.zeros((N, N)), 0.0)
    pf = flat_point(N, h=0.0, r0=r0)
    errs = []
    for eps in (2.5e-4, 6.25e-5, 1.5625e-5):
        par = BubbleParams(math.sqrt(eps), np.zeros(N), r0)
        shift = (energy_quadrature(p14, par, pk, p14.pair, eps)
                 - energy_quadrature(p14, par, pf, p14.pair, eps)) / eps
        errs.append(abs(shift / (-K * pk.scal / (6 * N)) - 1))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 0.01


def test_weight_hessian_shift(p14, p14_consts):
    K = k_constant(p14_consts, p14.pair)
    H = np.diag(np.linspace(-1, 2, N))
    eta = np.zeros(N)
    eta[1] = 0.3
    ph = PointGeometry(flat_jet(N, 6.0), 1.0, np.zeros(N), H, 0.0)
    pf = flat_point(N, h=0.0, r0=6.0)
    want = K * np.trace(H) / (2 * N) + p14_consts.L1 * eta @ H @ eta / N
    errs = []
    for eps in (1e-3, 2.5e-4, 6.25e-5):
        par = BubbleParams(math.sqrt(eps), eta, 6.0)
        shift = (energy_quadrature(p14, par, ph, p14.pair, eps)
                 - energy_quadrature(p14, par, pf, p14.pair, eps)) / eps
        errs.append(abs(shift / want - 1))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-3


def test_negative_curvature_guard(p14):
    pk = PointGeometry(constant_curvature_jet(N, -0.5, 6.0), 1.0, np.zeros(N), np.zeros((N, N)), 0.0)
    with pytest.raises(DomainError):
        energy_quadrature(p14, BubbleParams(0.01, np.zeros(N), 6.0), pk, p14.pair, 1e-4)


def test_quadrature_tolerance(p14):
    pt = flat_point(N, h=1.0, r0=40.0)
    par = BubbleParams(0.1, np.zeros(N), 40.0)
    energy_quadrature(p14, par, pt, p14.pair, 0.01, tol=1e-8)
    with pytest.raises(QuadratureError) as info:
        energy_quadrature(p14, par, pt, p14.pair, 0.01, n_gauss=4, tol=1e-15)
    assert len(info.value.trace) == 2


def test_validation_table_and_guard(p14, p14_consts, p14_coeffs):
    pt = flat_point(N, h=1.0, r0=40.0)
    tab = expansion_validation(p14, pt, p14.pair, p14_consts, p14_coeffs, 1.0, None)
    assert tab.verdict == "PASS" and len(tab.rows) == 4
    assert tab.to_csv().splitlines()[0] == "eps,J_quad,J_expansion,residual,residual_over_eps"
    single = expansion_validation(p14, pt, p14.pair, p14_consts, p14_coeffs, 1.0, None, (0.01,))
    assert single.verdict == "INDETERMINATE"
    with pytest.raises(DomainError, match="delta/r0"):
        expansion_validation(p14, flat_point(N, h=1.0), p14.pair, p14_consts, p14_coeffs, 1.0, None)


def test_verdict_rules():
    assert ValidationTable([(0.1, 0, 0, 0, 2.0), (0.05, 0, 0, 0, 2.0)]).verdict == "FAIL"
    assert ValidationTable([(0.1, 0, 0, 0, 2.0), (0.05, 0, 0, 0, 1.0)]).verdict == "PASS"
    assert ValidationTable().verdict == "INDETERMINATE"
