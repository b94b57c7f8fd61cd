"""Reduced energy: coefficients c1, c2, the peak functional, and the predictor.

For a single peak at a point with data ``(Scal, a, D^2 a, h)`` the reduced
functional is

    Psi(t, eta) = [L3 Theta + L1 D^2a[eta, eta] / (N a)] t - c2 log t,

    Theta = h - K Scal / (6 N L3) + K lap(a) / (2 N L3 a),
    K = L2 - L4/(p+1) - L5/(q+1),

and the bubble width is ``delta = sqrt(eps t)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConstantsError, DomainError
from .geometry import PointGeometry
from .moments import MomentConstants, k_constant
from .problem_setup import CriticalPair, check_theorem_hypotheses

L3_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class ReducedCoefficients:
    c1: float
    c2: float

    def to_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2}


def compute_c1_c2(consts: MomentConstants, pair: CriticalPair, alpha=None, beta=None) -> ReducedCoefficients:
    """Coefficients of ``eps`` and ``-eps log eps`` in the one-peak energy.

    ``alpha`` and ``beta`` override the pair's values (for diagnostics such
    as the ``alpha = beta = 0`` limit).
    """
    a = pair.alpha if alpha is None else float(alpha)
    b = pair.beta if beta is None else float(beta)
    p1, q1 = pair.p + 1, pair.q + 1
    w = a / p1**2 + b / q1**2
    c1 = consts.L6 * a / p1 + consts.L7 * b / q1 - w * consts.L1
    c2 = 0.5 * pair.N * consts.L1 * w
    return ReducedCoefficients(float(c1), float(c2))


def theta_threshold(point: PointGeometry, consts: MomentConstants, pair: CriticalPair) -> float:
    """The value ``h`` has to exceed for Theta > 0."""
    if consts.L3 == 0 or not np.isfinite(consts.L3):
        raise DegenerateConstantsError("L3 must be finite and non-zero")
    K = k_constant(consts, pair)
    N = point.N
    return float(K * point.scal / (6 * N * consts.L3) - K * point.lap_a / (2 * N * consts.L3 * point.a_val))


def theta_at_point(point: PointGeometry, consts: MomentConstants, pair: CriticalPair) -> float:
    return float(point.h_val - theta_threshold(point, consts, pair))


def _eta(eta, N):
    if eta is None:
        return np.zeros(N)
    e = np.asarray(eta, dtype=float).reshape(-1)
    if e.shape != (N,):
        raise DomainError(f"eta must have length {N}")
    return e


def psi(t: float, eta, point: PointGeometry, consts: MomentConstants,
        coeffs: ReducedCoefficients, pair: CriticalPair) -> float:
    """Reduced functional ``Psi(t, eta)``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    e = _eta(eta, point.N)
    theta = theta_at_point(point, consts, pair)
    quad = float(e @ point.hess_a @ e)
    slope = consts.L3 * theta + consts.L1 * quad / (point.N * point.a_val)
    return float(slope * t - coeffs.c2 * math.log(t))


@dataclass(frozen=True)
class PeakPrediction:
    """Outcome of the concentration predictor at one point.

    ``t_star`` solves ``d/dt Psi(t, 0) = 0``; ``t_unscaled = c2 / Theta`` is the
    alternative normalization.  Both are ``None`` when ``Theta <= 0``.
    """

    theta: float
    t_star: float | None
    t_unscaled: float | None
    eta_star: np.ndarray
    feasible: bool
    coeffs: ReducedCoefficients
    L3: float
    discrepancy: bool
    reasons: tuple = ()
    hypothesis: dict = field(default_factory=dict)

    def delta(self, eps: float) -> float:
        """Bubble width ``sqrt(eps t_star)``."""
        if self.t_star is None:
            raise DomainError("no positive concentration parameter at an infeasible point")
        return math.sqrt(eps * self.t_star)

    @property
    def delta_of_eps(self) -> dict:
        return {"formula": "sqrt(eps * t_star)", "t_star": self.t_star}

    def to_dict(self, eps_schedule=(0.04, 0.02, 0.01, 0.005)) -> dict:
        table = [[e, self.delta(e)] for e in eps_schedule] if self.t_star is not None else []
        return {
            "theta": self.theta, "t_star": self.t_star, "t_unscaled": self.t_unscaled,
            "eta_star": self.eta_star.tolist(), "feasible": self.feasible,
            "c1": self.coeffs.c1, "c2": self.coeffs.c2, "L3": self.L3,
            "t_discrepancy": self.discrepancy, "reasons": list(self.reasons),
            "hypothesis": self.hypothesis, "delta_table": table,
        }


def predict_concentration(point: PointGeometry, consts: MomentConstants,
                          coeffs: ReducedCoefficients, pair: CriticalPair,
                          warn: bool = True) -> PeakPrediction:
    """Predict the concentration parameter at ``point``.

    Infeasibility (``Theta <= 0``, degenerate or non-critical ``a``, or no
    admissible dimension/exponent condition) is reported, not raised.
    """
    if not coeffs.c2 > 0:
        raise DomainError(f"c2 must be positive, got {coeffs.c2}")
    theta = theta_at_point(point, consts, pair)
    report = check_theorem_hypotheses(pair)
    reasons = []
    if theta > 0:
        t_star = coeffs.c2 / (consts.L3 * theta)
        t_unscaled = coeffs.c2 / theta
    else:
        t_star = t_unscaled = None
        thr = theta_threshold(point, consts, pair)
        reasons.append(f"h = {point.h_val:.6g} does not exceed the threshold {thr:.6g}")
    if not point.critical_a:
        reasons.append("grad a does not vanish at the point")
    if not point.nondegenerate_a:
        reasons.append("D^2 a is singular at the point")
    if not report.satisfied:
        reasons.append(f"no admissible condition for N={pair.N}, p={pair.p}")
    discrepancy = abs(consts.L3 - 1.0) > L3_UNIT_TOL
    if discrepancy and warn and t_star is not None:
        warnings.warn(f"t_star = c2/(L3 Theta) = {t_star:.6g} differs from c2/Theta = {t_unscaled:.6g} "
                      f"since L3 = {consts.L3:.6g}", stacklevel=2)
    return PeakPrediction(
        theta=theta, t_star=t_star, t_unscaled=t_unscaled, eta_star=np.zeros(point.N),
        feasible=not reasons, coeffs=coeffs, L3=consts.L3, discrepancy=discrepancy,
        reasons=tuple(reasons), hypothesis=report.to_dict(),
    )


def grid_search_t(point, consts, coeffs, pair, t_lo: float, t_hi: float, n: int = 10_000):
    """Brute-force minimizer of ``Psi(., 0)`` over ``n`` log-spaced values.

    Returns ``(t_min, log_step)`` where ``log_step`` is the grid spacing in
    ``log t``.
    """
    if not 0 < t_lo < t_hi:
        raise DomainError("need 0 < t_lo < t_hi")
    t = np.exp(np.linspace(math.log(t_lo), math.log(t_hi), n))
    theta = theta_at_point(point, consts, pair)
    vals = consts.L3 * theta * t - coeffs.c2 * np.log(t)
    k = int(np.argmin(vals))
    return float(t[k]), float(math.log(t_hi / t_lo) / (n - 1))


def multipeak_expansion(t_bar, eta_bar, points, consts: MomentConstants,
                        coeffs: ReducedCoefficients, pair: CriticalPair, eps: float) -> float:
    """Leading terms of the energy of a ``k``-peak configuration."""
    t_bar = list(t_bar)
    points = list(points)
    eta_bar = [None] * len(points) if eta_bar is None else list(eta_bar)
    if not (len(t_bar) == len(points) == len(eta_bar)) or not points:
        raise DomainError("t_bar, eta_bar and points must have the same positive length")
    if eps < 0:
        raise DomainError("eps must be non-negative")
    eps_log = eps * math.log(eps) if eps > 0 else 0.0
    lead = 2.0 / pair.N * consts.L1
    total = []
    for t, e, pt in zip(t_bar, eta_bar, points):
        val = lead + coeffs.c1 * eps - coeffs.c2 * eps_log
        if eps > 0:
            val += psi(t, e, pt, consts, coeffs, pair) * eps
        total.append(pt.a_val * val)
    return float(math.fsum(total))
