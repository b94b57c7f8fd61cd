"""Moment constants L1..L7 of the radial ground state.

With ``omega = |S^(N-1)|`` and all integrals over ``(0, inf)`` against
``r^(N-1) dr``::

    L1 = omega * int U' V'          L2 = omega * int r^2 U' V'
    L3 = omega * int U V            L4 = omega * int r^2 V^(p+1)
    L5 = omega * int r^2 U^(q+1)    L6 = omega * int V^(p+1) log V
    L7 = omega * int U^(q+1) log U

The stored range is integrated by composite Gauss-Legendre in ``log r`` on
the cells of the profile grid; the range beyond ``r_max`` is closed with
the tail laws of the decay regime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .ground_state import RadialProfile, evaluate_profile
from .problem_setup import CriticalPair, DecayRegime

NAMES = ("L1", "L2", "L3", "L4", "L5", "L6", "L7")
UNDERFLOW = 1e-300


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^(N-1) in R^N."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def integrand_exponents(regime: DecayRegime, N: int, p: float, q: float) -> dict:
    """Power of ``r`` in each integrand (including ``r^(N-1)``) beyond ``r_max``."""
    au, av = regime.u_tail_exponent, regime.v_tail_exponent
    return {
        "L1": au + av + N - 3,
        "L2": au + av + N - 1,
        "L3": au + av + N - 1,
        "L4": 2 + av * (p + 1) + N - 1,
        "L5": 2 + au * (q + 1) + N - 1,
        "L6": av * (p + 1) + N - 1,
        "L7": au * (q + 1) + N - 1,
    }


def integrability_precheck(regime: DecayRegime, N: int, pair: CriticalPair | None = None) -> dict:
    """Flag which of L1..L7 are finite from the tail-exponent arithmetic.

    An integrand ``~ r^e (log r)^m`` is integrable at infinity iff ``e < -1``.
    Without ``pair`` the exponents of L4..L7 are bounded using ``p, q > 1``,
    which gives a sufficient condition only.
    """
    if pair is not None:
        ex = integrand_exponents(regime, N, pair.p, pair.q)
        return {k: bool(e < -1 - 1e-12) for k, e in ex.items()}
    # p, q > 1 makes every L4..L7 exponent strictly smaller than at p = q = 1
    ex = integrand_exponents(regime, N, 1.0, 1.0)
    flags = {k: bool(ex[k] < -1 - 1e-12) for k in ("L1", "L2", "L3")}
    flags.update({k: bool(ex[k] <= -1 + 1e-12) for k in ("L4", "L5", "L6", "L7")})
    return flags


@dataclass(frozen=True)
class MomentConstants:
    """L1..L7 with diagnostics.

    ``tail_fractions[k]`` is the share of ``|L_k|`` contributed beyond
    ``r_max``; ``est_error[k]`` compares the quadrature with a half-order
    rule on the same cells.
    """

    L1: float
    L2: float
    L3: float
    L4: float
    L5: float
    L6: float
    L7: float
    sphere_area: float
    tail_fractions: dict = field(default_factory=dict)
    est_error: dict = field(default_factory=dict)
    normalization: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in NAMES}

    def to_dict(self) -> dict:
        d = self.as_dict()
        d.update(sphere_area=self.sphere_area, tail_fractions=dict(self.tail_fractions),
                 est_error=dict(self.est_error), normalization=dict(self.normalization),
                 provenance=dict(self.provenance))
        return d


def k_constant(consts: MomentConstants, pair: CriticalPair) -> float:
    """``L2 - L4/(p+1) - L5/(q+1)``, the coefficient of the curvature terms."""
    return consts.L2 - consts.L4 / (pair.p + 1) - consts.L5 / (pair.q + 1)


def _xlogx(x, power):
    """``x^power log x`` with values below the underflow floor set to 0."""
    out = np.zeros_like(x)
    m = x > UNDERFLOW
    out[m] = x[m] ** power * np.log(x[m])
    return out


def _integrands(r, U, V, dU, dV, p, q):
    r2 = r * r
    Vp1 = V ** (p + 1)
    Uq1 = U ** (q + 1)
    return np.vstack([
        dU * dV,
        r2 * dU * dV,
        U * V,
        r2 * Vp1,
        r2 * Uq1,
        _xlogx(V, p + 1),
        _xlogx(U, q + 1),
    ])


def _nodes(profile: RadialProfile, n: int):
    """Quadrature nodes and weights (including ``r^(N-1)``) on ``[0, r_max]``."""
    N = profile.pair.N
    x, w = np.polynomial.legendre.leggauss(n)
    g = profile.grid
    # first cell [0, r1] in r, remaining cells in s = log r
    r_first = 0.5 * g[1] * (x + 1)
    w_first = 0.5 * g[1] * w * r_first ** (N - 1)
    s = np.log(g[1:])
    half = 0.5 * np.diff(s)
    rn = np.exp((s[:-1, None] + half[:, None] * (x[None, :] + 1)).ravel())
    wn = (half[:, None] * w[None, :]).ravel() * rn**N
    return np.concatenate([r_first, rn]), np.concatenate([w_first, wn])


def _cell_quadrature(profile: RadialProfile, n: int) -> np.ndarray:
    """Integrals over ``[0, r_max]`` of the seven integrands times ``r^(N-1)``."""
    r, w = _nodes(profile, n)
    U, V, dU, dV = evaluate_profile(profile, r)
    F = _integrands(r, U, V, dU, dV, profile.pair.p, profile.pair.q)
    # fixed summation order for reproducibility
    return np.array([math.fsum(row) for row in F * w[None, :]])


def _power_log_tail(e: float, m: float, R: float) -> float:
    """``int_R^inf r^e (log r)^m dr`` for ``e < -1`` and ``R > 1``."""
    lam = -(e + 1.0)
    L = math.log(R)
    if m == 0:
        return math.exp(-lam * L) / lam
    return float(special.gammaincc(m + 1, lam * L) * special.gamma(m + 1) / lam ** (m + 1))


def _loglog_tail(e: float, m: float, R: float) -> float:
    """``int_R^inf r^e (log r)^m log log r dr``."""
    lam = -(e + 1.0)
    L = math.log(R)
    # substitute r = exp(L + x / lam)
    f = lambda x: math.exp(-x) * (L + x / lam) ** m * math.log(L + x / lam)
    val, _ = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return math.exp(-lam * L) / lam * val


def _tails(profile: RadialProfile) -> np.ndarray:
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    R = profile.r_max
    reg = profile.regime
    au, av = reg.u_tail_exponent, reg.v_tail_exponent
    lf = 1.0 if reg.log_factor else 0.0
    cu, cv = profile.tail_coeff_u, profile.tail_coeff_v
    ex = integrand_exponents(reg, N, p, q)
    T = _power_log_tail

    def deriv_pair(e):
        # U' V' = cu cv av r^(au+av-2) (log r)^lf (au + lf / log r)
        out = au * T(e, lf, R)
        if lf:
            out += T(e, 0.0, R)
        return cu * cv * av * out

    L6 = cv ** (p + 1) * (math.log(cv) * T(ex["L6"], 0.0, R) + av * T(ex["L6"], 1.0, R))
    mq = lf * (q + 1)
    L7 = cu ** (q + 1) * (math.log(cu) * T(ex["L7"], mq, R) + au * T(ex["L7"], mq + 1, R))
    if lf:
        L7 += cu ** (q + 1) * _loglog_tail(ex["L7"], mq, R)
    return np.array([
        deriv_pair(ex["L1"]),
        deriv_pair(ex["L2"]),
        cu * cv * T(ex["L3"], lf, R),
        cv ** (p + 1) * T(ex["L4"], 0.0, R),
        cu ** (q + 1) * T(ex["L5"], mq, R),
        L6,
        L7,
    ])


def compute_moments(profile: RadialProfile, n_gauss: int = 8) -> MomentConstants:
    """Compute L1..L7 for ``profile``.

    Raises
    ------
    DomainError
        If a constant diverges for the profile's decay regime.
    """
    pair = profile.pair
    flags = integrability_precheck(profile.regime, pair.N, pair)
    bad = [k for k, ok in flags.items() if not ok]
    if bad:
        raise DomainError(f"{', '.join(bad)} diverge in the {profile.regime.tag.value} regime "
                          f"for N={pair.N}, p={pair.p}")
    if profile.r_max <= math.e:
        raise DomainError("tail closure needs r_max > e")
    omega = sphere_area(pair.N)
    inner = _cell_quadrature(profile, n_gauss)
    coarse = _cell_quadrature(profile, max(2, n_gauss // 2))
    tail = _tails(profile)
    total = omega * (inner + tail)
    fr = {k: float(abs(t) / (abs(i) + abs(t))) if (i or t) else 0.0
          for k, i, t in zip(NAMES, inner, tail)}
    err = {k: float(omega * abs(a - b)) for k, a, b in zip(NAMES, inner, coarse)}
    return MomentConstants(
        *map(float, total), sphere_area=omega, tail_fractions=fr, est_error=err,
        normalization=dict(profile.normalization),
        provenance={"profile_hash": profile.content_hash(), "options": profile.options.to_dict(),
                    "pair": pair.to_dict()},
    )


def energy_identity(profile: RadialProfile, n_gauss: int = 8) -> tuple[float, float, float]:
    """Return ``(int grad U . grad V, int V^(p+1), int U^(q+1))`` over R^N.

    For an exact ground state the three agree.
    """
    pair = profile.pair
    omega = sphere_area(pair.N)
    inner = _cell_quadrature(profile, n_gauss)
    tail = _tails(profile)
    L1 = omega * (inner[0] + tail[0])
    N, p, q = pair.N, pair.p, pair.q
    r, w = _nodes(profile, n_gauss)
    U, V, _, _ = evaluate_profile(profile, r)
    iv = math.fsum(V ** (p + 1) * w)
    iu = math.fsum(U ** (q + 1) * w)
    ex = integrand_exponents(profile.regime, N, p, q)
    lf = 1.0 if profile.regime.log_factor else 0.0
    R = profile.r_max
    iv += profile.tail_coeff_v ** (p + 1) * _power_log_tail(ex["L6"], 0.0, R)
    iu += profile.tail_coeff_u ** (q + 1) * _power_log_tail(ex["L7"], lf * (q + 1), R)
    return float(L1), float(omega * iv), float(omega * iu)
