"""Radial ground state of the critical Lane-Emden system on R^N.

Solves

    -U'' - (N-1)/r U' = V^p,    -V'' - (N-1)/r V' = U^q,

with ``U(0) = 1``, ``U'(0) = V'(0) = 0`` and both components positive and
decaying.  The unknown ``b = V(0)`` is found by bisection on the sign
pattern (which component hits zero first).  Double precision limits pure
shooting to moderate radii, so the trusted part of the shot is continued to
``r_max`` by a collocation solve of the exterior problem in logarithmic
variables, closed by the exact far-field conditions of the decay regime.
"""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import solve_bvp, solve_ivp

from .errors import DomainError, SolverError
from .problem_setup import CriticalPair, DecayRegime, RegimeTag, classify_regime

PROFILE_FORMAT_VERSION = 1
R_START = 1e-3


@dataclass(frozen=True)
class ShootingOptions:
    """Solver options.

    Parameters
    ----------
    r_max : float
        Outer radius of the stored grid.
    rel_tol, abs_tol : float
        Collocation tolerance and boundary-condition tolerance of the
        exterior solve.
    bisection_iters : int
        Maximum number of bisection steps on ``log V(0)``.
    positivity_floor : float
        Bisection stops once the relative bracket width drops below this.
    nodes_per_decade : int
        Density of the geometric grid.
    shoot_rtol : float
        Relative tolerance of the shooting integrator.  It has to be much
        tighter than ``rel_tol`` because the bisection resolves ``V(0)`` to
        machine precision.
    """

    r_max: float = 1e4
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    bisection_iters: int = 200
    positivity_floor: float = 1e-14
    nodes_per_decade: int = 40
    shoot_rtol: float = 1e-13

    def __post_init__(self):
        if not self.r_max > 10:
            raise DomainError(f"r_max must exceed 10, got {self.r_max}")
        for name in ("rel_tol", "abs_tol", "positivity_floor", "shoot_rtol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.bisection_iters < 1 or self.nodes_per_decade < 4:
            raise DomainError("need bisection_iters >= 1 and nodes_per_decade >= 4")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Ground state sampled on ``grid`` = [0, geometric nodes up to r_max].

    ``normalization`` records ``U0 = U(0)``, ``V0 = V(0)`` and the dilation
    ``scale`` relative to the canonical ``U(0) = 1`` representative.
    Coefficients satisfy ``U(r) ~ tail_coeff_u * r**u_tail * (log r)**lf``
    beyond ``r_max``.
    """

    pair: CriticalPair
    grid: np.ndarray
    U: np.ndarray
    V: np.ndarray
    dU: np.ndarray
    dV: np.ndarray
    regime: DecayRegime
    tail_coeff_u: float
    tail_coeff_v: float
    normalization: dict
    options: ShootingOptions = field(default_factory=ShootingOptions)

    def __post_init__(self):
        for name in ("grid", "U", "V", "dU", "dV"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.grid.size
        if any(getattr(self, k).shape != (n,) for k in ("U", "V", "dU", "dV")):
            raise DomainError("profile arrays must match the grid")
        if self.grid[0] != 0.0 or np.any(np.diff(self.grid) <= 0):
            raise DomainError("grid must start at 0 and increase strictly")
        object.__setattr__(self, "normalization", dict(self.normalization))

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @property
    def N(self) -> int:
        return self.pair.N

    def to_dict(self) -> dict:
        return {
            "format": "lane_emden.RadialProfile",
            "version": PROFILE_FORMAT_VERSION,
            "pair": self.pair.to_dict(),
            "options": self.options.to_dict(),
            "normalization": self.normalization,
            "regime": self.regime.to_dict(),
            "tail_coeff_u": self.tail_coeff_u,
            "tail_coeff_v": self.tail_coeff_v,
            "r": self.grid.tolist(),
            "U": self.U.tolist(),
            "V": self.V.tolist(),
            "dU": self.dU.tolist(),
            "dV": self.dV.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RadialProfile":
        if d.get("format") != "lane_emden.RadialProfile":
            raise DomainError("not a profile document")
        if d.get("version") != PROFILE_FORMAT_VERSION:
            raise DomainError(f"unsupported profile version {d.get('version')!r}")
        return cls(
            pair=CriticalPair.from_dict(d["pair"]),
            grid=np.array(d["r"]),
            U=np.array(d["U"]),
            V=np.array(d["V"]),
            dU=np.array(d["dU"]),
            dV=np.array(d["dV"]),
            regime=DecayRegime.from_dict(d["regime"]),
            tail_coeff_u=d["tail_coeff_u"],
            tail_coeff_v=d["tail_coeff_v"],
            normalization=d["normalization"],
            options=ShootingOptions(**d["options"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "RadialProfile":
        return cls.from_dict(json.loads(text))

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


# ---------------------------------------------------------------- shooting


def _log_grid(r_lo: float, r_hi: float, per_decade: int) -> np.ndarray:
    n = int(round(math.log10(r_hi / r_lo) * per_decade))
    return np.exp(np.linspace(math.log(r_lo), math.log(r_hi), n + 1))


class _Shooter:
    """Integrates the radial system in ``s = log r`` with state (U, rU', V, rV')."""

    def __init__(self, pair: CriticalPair, s_end: float, rtol: float):
        self.N, self.p, self.q = pair.N, pair.p, pair.q
        self.s0 = math.log(R_START)
        self.s_end = s_end
        self.rtol = rtol

        def rhs(s, y):
            U, F, V, G = y
            r2 = math.exp(2 * s)
            return [
                F,
                -(self.N - 2) * F - r2 * math.copysign(abs(V) ** self.p, V),
                G,
                -(self.N - 2) * G - r2 * math.copysign(abs(U) ** self.q, U),
            ]

        def hit_u(s, y):
            return y[0]

        def hit_v(s, y):
            return y[2]

        hit_u.terminal = hit_v.terminal = True
        self.rhs, self.events = rhs, [hit_u, hit_v]

    def start(self, b: float) -> list:
        N, p, r = self.N, self.p, R_START
        return [1 - b**p * r**2 / (2 * N), -(b**p) * r**2 / N, b - r**2 / (2 * N), -(r**2) / N]

    def shoot(self, b: float, dense: bool = False):
        """Return (cls, s_stop, solution); cls = +1 if U vanishes first, -1 if V, 0 if neither."""
        sol = solve_ivp(
            self.rhs, (self.s0, self.s_end), self.start(b), method="DOP853",
            rtol=self.rtol, atol=1e-300, events=self.events, dense_output=dense,
        )
        if sol.status == -1:
            last = math.exp(sol.t[-1]) if sol.t.size else R_START
            raise SolverError(f"integrator failed at r={last:.6g}: {sol.message}",
                              [{"b": b, "last_good_radius": last}])
        if sol.t_events[0].size:
            return 1, float(sol.t_events[0][0]), sol
        if sol.t_events[1].size:
            return -1, float(sol.t_events[1][0]), sol
        return 0, float(sol.t[-1]), sol


def _bracket(shooter: _Shooter, trace: list) -> tuple[float, float, int, int]:
    """Find ``lo < hi`` whose shots are classified differently, expanding from b = 1."""
    c1 = shooter.shoot(1.0)[0]
    trace.append({"b": 1.0, "class": c1})
    if c1 == 0:
        return 1.0, 1.0, 0, 0
    for k in range(1, 61):
        for b in (2.0**k, 2.0**-k):
            c = shooter.shoot(b)[0]
            trace.append({"b": b, "class": c})
            if c != c1:
                return (1.0, b, c1, c) if b > 1 else (b, 1.0, c, c1)
    raise SolverError("no bisection bracket found for V(0) in [2^-60, 2^60]", trace)


def _agreeing_prefix(sol_lo, sol_hi, s0, s_hi, tol=1e-11):
    """Largest ``s`` up to which both bracket shots agree to ``tol`` relative."""
    ss = np.linspace(s0, s_hi, 4000)
    a, b = sol_lo.sol(ss), sol_hi.sol(ss)
    d = np.maximum(np.abs(a[0] / b[0] - 1), np.abs(a[2] / b[2] - 1))
    bad = np.nonzero(~(d < tol))[0]
    k = (bad[0] - 1) if bad.size else ss.size - 1
    if k < 1:
        return float(ss[0])
    return float(ss[k])


def _exterior_solve(pair, regime, y_match, s_m, s_max, opts, trace):
    """Collocation solve on [s_m, s_max] in w = log U, P = rU'/U, z = log V, Q = rV'/V."""
    N, p, q = pair.N, pair.p, pair.q
    au = regime.u_tail_exponent
    we, ze = math.log(y_match[0]), math.log(y_match[2])

    def f(s, y):
        w, P, z, Q = y
        return np.vstack([
            P, -(N - 2) * P - P**2 - np.exp(2 * s + p * z - w),
            Q, -(N - 2) * Q - Q**2 - np.exp(2 * s + q * w - z),
        ])

    # A forcing r^-g gives (rU' + (N-2)U) = r^2 V^p / (g - 2) exactly, which
    # removes the constant mode without fixing the unknown r^(2-N) amplitude.
    gu, gv = (N - 2) * p, -au * q

    def bc(ya, yb):
        return np.array([
            ya[0] - we,
            ya[2] - ze,
            yb[1] + (N - 2) - math.exp(2 * s_max + p * yb[2] - yb[0]) / (gu - 2),
            yb[3] + (N - 2) - math.exp(2 * s_max + q * yb[0] - yb[2]) / (gv - 2),
        ])

    s = np.linspace(s_m, s_max, 400)
    Y = np.empty((4, s.size))
    Y[0] = we + au * (s - s_m)
    Y[1] = au
    Y[2] = ze + (2 - N) * (s - s_m)
    Y[3] = 2 - N
    with np.errstate(over="ignore", under="ignore"):
        res = solve_bvp(f, bc, s, Y, tol=opts.rel_tol, bc_tol=opts.abs_tol, max_nodes=300000)
    trace.append({"exterior_status": int(res.status), "exterior_nodes": int(res.x.size)})
    if res.status != 0:
        raise SolverError(f"exterior collocation failed: {res.message}", trace)
    return res


def _inward_polish(pair, ext, s_m, s_max, s_eval, rtol, trace):
    """Re-integrate the exterior inward from ``r_max`` at shooting tolerance.

    Collocation leaves noise at the ``rel_tol`` level in ``rU'``, which is
    amplified where the flux ``r^(N-1) U'`` is nearly constant.  The inward
    pass carries the flux deviation from its value at ``r_max`` as state, so
    the varying part is resolved to ``rtol`` relative to itself.  Inward
    integration is stable for both power-law modes.
    """
    N, p, q = pair.N, pair.p, pair.q
    w, P, z, Q = ext.sol(s_max)
    R = math.exp(s_max)
    Fu0 = R ** (N - 2) * P * math.exp(w)
    Fv0 = R ** (N - 2) * Q * math.exp(z)

    def rhs(s, y):
        U, du, V, dv = y
        r = math.exp(s)
        return [r ** (2 - N) * (du + Fu0), -(r**N) * abs(V) ** p,
                r ** (2 - N) * (dv + Fv0), -(r**N) * abs(U) ** q]

    sol = solve_ivp(rhs, (s_max, s_m), [math.exp(w), 0.0, math.exp(z), 0.0], method="DOP853",
                    rtol=rtol, atol=1e-300, first_step=1e-4, dense_output=True)
    if sol.status != 0:
        raise SolverError(f"inward integration failed: {sol.message}", trace)
    trace.append({"junction_mismatch": float(abs(math.log(sol.sol(s_m)[0]) - ext.sol(s_m)[0]))})
    U, du, V, dv = sol.sol(s_eval)
    r = np.exp(s_eval)
    # state layout of the shooter: (U, rU', V, rV')
    return np.vstack([U, r ** (2 - N) * (du + Fu0), V, r ** (2 - N) * (dv + Fv0)])


def solve_ground_state(pair: CriticalPair, opts: ShootingOptions | None = None) -> RadialProfile:
    """Solve for the positive radial ground state normalized by ``U(0) = 1``.

    Raises
    ------
    SolverError
        If no bisection bracket exists, the integrator fails, or the exterior
        collocation does not converge.  ``err.trace`` holds the history.
    """
    opts = opts or ShootingOptions()
    regime = classify_regime(pair)
    s_max = math.log(opts.r_max)
    shooter = _Shooter(pair, s_max, opts.shoot_rtol)
    trace: list = []

    lo, hi, c_lo, c_hi = _bracket(shooter, trace)
    for _ in range(opts.bisection_iters):
        if lo == hi or hi / lo - 1 <= opts.positivity_floor:
            break
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        c = shooter.shoot(mid)[0]
        if c == 0:
            lo = hi = mid
            break
        if c == c_lo:
            lo = mid
        else:
            hi = mid
    trace.append({"bracket": [lo, hi]})

    b = float(math.sqrt(lo * hi))
    if lo == hi:
        # exact hit: perturb by a few ulps to locate where shots stop agreeing
        lo, hi = lo * (1 - 8e-16), hi * (1 + 8e-16)
    _, s_lo, sol_lo = shooter.shoot(lo, dense=True)
    _, s_hi, sol_hi = shooter.shoot(hi, dense=True)
    s_m = _agreeing_prefix(sol_lo, sol_hi, shooter.s0, min(s_lo, s_hi))
    trace.append({"match_radius": math.exp(s_m)})
    if s_m - shooter.s0 < math.log(100.0):
        raise SolverError(f"shooting trusted only up to r={math.exp(s_m):.3g}", trace)

    def inner(s):
        return 0.5 * (sol_lo.sol(s) + sol_hi.sol(s))

    if s_m < s_max - 1e-12:
        ext = _exterior_solve(pair, regime, inner(s_m), s_m, s_max, opts, trace)
    else:
        ext = None

    r_geo = _log_grid(R_START, opts.r_max, opts.nodes_per_decade)
    s_geo = np.log(r_geo)
    Y = np.empty((4, s_geo.size))
    m_in = s_geo <= s_m
    Y[:, m_in] = inner(s_geo[m_in])
    if ext is not None and np.any(~m_in):
        Y[:, ~m_in] = _inward_polish(pair, ext, s_m, s_max, s_geo[~m_in], opts.shoot_rtol, trace)

    grid = np.concatenate([[0.0], r_geo])
    U = np.concatenate([[1.0], Y[0]])
    V = np.concatenate([[b], Y[2]])
    dU = np.concatenate([[0.0], Y[1] / r_geo])
    dV = np.concatenate([[0.0], Y[3] / r_geo])
    if not (np.all(U > 0) and np.all(V > 0)):
        raise SolverError("profile lost positivity", trace)
    if not (np.all(dU[1:] < 0) and np.all(dV[1:] < 0)):
        raise SolverError("profile is not strictly decreasing", trace)

    cu, cv = _anchored_tail_coeffs(grid, U, V, regime)
    prof = RadialProfile(
        pair=pair, grid=grid, U=U, V=V, dU=dU, dV=dV, regime=regime,
        tail_coeff_u=cu, tail_coeff_v=cv,
        normalization={"U0": 1.0, "V0": b, "scale": 1.0}, options=opts,
    )
    _check_tail_consistency(prof)
    return prof


def _anchored_tail_coeffs(grid, U, V, regime):
    R = grid[-1]
    lf = 1.0 if regime.log_factor else 0.0
    cu = U[-1] / (R**regime.u_tail_exponent * math.log(R) ** lf)
    cv = V[-1] / R**regime.v_tail_exponent
    return float(cu), float(cv)


def _check_tail_consistency(prof: RadialProfile, rel=0.02):
    su, sv, _, _ = fit_tail_exponents(prof, (prof.r_max / 10, prof.r_max))
    for got, want, name in ((su, prof.regime.u_tail_exponent, "U"),
                            (sv, prof.regime.v_tail_exponent, "V")):
        if abs(got - want) > rel * abs(want):
            warnings.warn(f"{name} tail slope {got:.4f} differs from {want:.4f} by more than "
                          f"{rel:.0%}; the grid may not reach the asymptotic range", stacklevel=3)


# ------------------------------------------------------------ evaluation


def _hermite(s, s0, s1, y0, y1, m0, m1):
    h = s1 - s0
    t = (s - s0) / h
    t2, t3 = t * t, t * t * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1)


def evaluate_profile(profile: RadialProfile, r):
    """Evaluate ``(U, V, U', V')`` at radius ``r`` (scalar or array).

    Inside the grid, ``log U`` and ``log(-U'/r)`` are cubic Hermite
    interpolants in ``log r`` using slopes that follow from the ODE, so the
    interpolant is positive and ``U'`` keeps its sign.  Below the first
    positive node the regular series start is used; beyond ``r_max`` the
    tail law anchored at ``r_max``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise DomainError("radius must be non-negative")
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    g = profile.grid
    U0, V0 = profile.U[0], profile.V[0]
    U = np.empty_like(r_arr)
    V = np.empty_like(r_arr)
    dU = np.empty_like(r_arr)
    dV = np.empty_like(r_arr)

    # series start
    m = r_arr < g[1]
    rm = r_arr[m]
    U[m] = U0 - V0**p * rm**2 / (2 * N)
    V[m] = V0 - U0**q * rm**2 / (2 * N)
    dU[m] = -(V0**p) * rm / N + 0.0  # avoid -0.0 at the origin
    dV[m] = -(U0**q) * rm / N + 0.0

    # interior
    m = (r_arr >= g[1]) & (r_arr <= g[-1])
    if np.any(m):
        gr = g[1:]
        sg = np.log(gr)
        s = np.log(r_arr[m])
        k = np.clip(np.searchsorted(sg, s, side="right") - 1, 0, sg.size - 2)
        Ug, Vg, dUg, dVg = profile.U[1:], profile.V[1:], profile.dU[1:], profile.dV[1:]
        fu, fv = dUg / gr, dVg / gr  # smooth, negative
        Vp, Uq = Vg**p, Ug**q
        lu, lv = np.log(Ug), np.log(Vg)
        mu, mv = gr * dUg / Ug, gr * dVg / Vg
        lfu, lfv = np.log(-fu), np.log(-fv)
        mfu, mfv = -N - Vp / fu, -N - Uq / fv
        a, b = k, k + 1
        s0, s1 = sg[a], sg[b]
        rr = r_arr[m]
        U[m] = np.exp(_hermite(s, s0, s1, lu[a], lu[b], mu[a], mu[b]))
        V[m] = np.exp(_hermite(s, s0, s1, lv[a], lv[b], mv[a], mv[b]))
        dU[m] = -rr * np.exp(_hermite(s, s0, s1, lfu[a], lfu[b], mfu[a], mfu[b]))
        dV[m] = -rr * np.exp(_hermite(s, s0, s1, lfv[a], lfv[b], mfv[a], mfv[b]))

    # tail extension
    m = r_arr > g[-1]
    if np.any(m):
        rr = r_arr[m]
        au, av = profile.regime.u_tail_exponent, profile.regime.v_tail_exponent
        lf = 1.0 if profile.regime.log_factor else 0.0
        with np.errstate(under="ignore"):
            U[m] = profile.tail_coeff_u * rr**au * np.log(rr) ** lf
            V[m] = profile.tail_coeff_v * rr**av
        dU[m] = U[m] * (au + lf / np.log(rr)) / rr
        dV[m] = V[m] * av / rr

    if scalar:
        return float(U[0]), float(V[0]), float(dU[0]), float(dV[0])
    return U, V, dU, dV


# --------------------------------------------------------------- checks


def _stencil(m: int) -> np.ndarray:
    """Weights of the central first-derivative stencil of order 2m on unit spacing."""
    k = np.arange(-m, m + 1)
    A = np.vander(k, increasing=True).T.astype(float)
    rhs = np.zeros(2 * m + 1)
    rhs[1] = 1.0
    return np.linalg.solve(A, rhs)


def log_derivative(values: np.ndarray, s: np.ndarray, power: float, m: int = 5):
    """Finite-difference ``d values / ds`` on a uniform ``s = log r`` grid.

    ``values`` is assumed to behave like ``r**power`` near the origin; the
    factor ``rho = (r^2 / (1 + r^2))^(power/2)`` is divided out before
    differencing so that fast growth there does not pollute the stencil.
    Returns ``(slice, derivative)`` for the interior nodes.
    """
    h = s[1] - s[0]
    r2 = np.exp(2 * s)
    rho = (r2 / (1 + r2)) ** (power / 2)
    w = _stencil(m) / h
    dg = np.convolve(values / rho, w[::-1], "valid")
    sl = slice(m, s.size - m)
    return sl, rho[sl] * dg + values[sl] * power / (1 + r2[sl])


def ode_residual(profile: RadialProfile) -> float:
    """Max relative residual of the radial system on the interior grid nodes.

    Uses the flux form ``U'' + (N-1)/r U' = r^(1-N) (r^(N-1) U')'`` with a
    tenth-order difference in ``log r`` of the stored flux, and normalizes the
    summed residuals by ``max(V^p, U^q)`` at each node.
    """
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    r = profile.grid[1:]
    s = np.log(r)
    U, V = profile.U[1:], profile.V[1:]
    Fu = r ** (N - 1) * profile.dU[1:]
    Fv = r ** (N - 1) * profile.dV[1:]
    sl, dFu = log_derivative(Fu, s, N)
    _, dFv = log_derivative(Fv, s, N)
    rN = r[sl] ** N
    Vp, Uq = V[sl] ** p, U[sl] ** q
    res = np.abs(dFu / rN + Vp) + np.abs(dFv / rN + Uq)
    return float(np.max(res / np.maximum(Vp, Uq)))


def _fit_window(profile, window, arrays):
    r_lo, r_hi = window
    if r_lo < 10 or r_hi > profile.r_max * (1 + 1e-12) or r_hi <= r_lo:
        raise DomainError(f"tail window must satisfy 10 <= r_lo < r_hi <= r_max, got {window}")
    m = (profile.grid >= r_lo) & (profile.grid <= r_hi)
    if m.sum() < 20:
        raise DomainError(f"only {int(m.sum())} grid nodes in window {window}; need >= 20")
    x = np.log(profile.grid[m])
    out = []
    for y, log_corr in arrays:
        yy = np.log(np.abs(y[m]))
        if log_corr:
            yy = yy - np.log(x)
        out.append(_linfit(x, yy))
    return out


def _linfit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), r2


def fit_tail_exponents(profile: RadialProfile, window=None):
    """Least-squares slopes of ``log U`` and ``log V`` against ``log r``.

    In the critical regime ``log log r`` is subtracted from ``log U`` first.
    Returns ``(slope_u, slope_v, r2_u, r2_v)``; ``window`` defaults to the
    last decade of the grid.
    """
    window = window or (profile.r_max / 10, profile.r_max)
    lf = profile.regime.log_factor
    (su, r2u), (sv, r2v) = _fit_window(profile, window, [(profile.U, lf), (profile.V, False)])
    return su, sv, r2u, r2v


def fit_derivative_tail_exponents(profile: RadialProfile, window=None):
    """Same as :func:`fit_tail_exponents` for ``|U'|`` and ``|V'|``."""
    window = window or (profile.r_max / 10, profile.r_max)
    lf = profile.regime.log_factor
    (su, r2u), (sv, r2v) = _fit_window(profile, window, [(profile.dU, lf), (profile.dV, False)])
    return su, sv, r2u, r2v


# ------------------------------------------------------------ utilities


def rescale_profile(profile: RadialProfile, lam: float) -> RadialProfile:
    """Apply the dilation ``U -> lam^(N/(q+1)) U(lam r)``, ``V -> lam^(N/(p+1)) V(lam r)``."""
    if not lam > 0:
        raise DomainError("dilation factor must be positive")
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    eu, ev = N / (q + 1), N / (p + 1)
    ku, kv = lam**eu, lam**ev
    au, av = profile.regime.u_tail_exponent, profile.regime.v_tail_exponent
    grid = profile.grid / lam
    norm = dict(profile.normalization)
    norm.update(U0=float(profile.U[0] * ku), V0=float(profile.V[0] * kv),
                scale=float(norm.get("scale", 1.0) * lam))
    cu = profile.tail_coeff_u * ku * lam**au
    if profile.regime.log_factor:
        # anchor at the new r_max so the extension stays continuous
        cu = ku * profile.U[-1] / (grid[-1] ** au * math.log(grid[-1]))
    return replace(
        profile, grid=grid, U=profile.U * ku, V=profile.V * kv,
        dU=profile.dU * ku * lam, dV=profile.dV * kv * lam,
        tail_coeff_u=float(cu), tail_coeff_v=float(profile.tail_coeff_v * kv * lam**av),
        normalization=norm,
    )


def closed_form_profile(r_max: float = 1e4, nodes_per_decade: int = 40) -> RadialProfile:
    """Exact ground state for ``N = 6``, ``p = q = 2``: ``U = V = (1 + r^2/24)^-2``."""
    pair = CriticalPair(6, 2.0, 2.0)
    grid = np.concatenate([[0.0], _log_grid(R_START, r_max, nodes_per_decade)])
    x = 1 + grid**2 / 24
    U = x**-2.0
    dU = -grid / 6 * x**-3.0
    regime = classify_regime(pair)
    cu, cv = _anchored_tail_coeffs(grid, U, U, regime)
    return RadialProfile(
        pair=pair, grid=grid, U=U, V=U.copy(), dU=dU, dV=dU.copy(), regime=regime,
        tail_coeff_u=cu, tail_coeff_v=cv, normalization={"U0": 1.0, "V0": 1.0, "scale": 1.0},
        options=ShootingOptions(r_max=r_max, nodes_per_decade=nodes_per_decade),
    )


def align_to_reference(profile: RadialProfile, U0: float) -> RadialProfile:
    """Rescale so that ``U(0) = U0`` (both are in the same dilation family)."""
    N, q = profile.pair.N, profile.pair.q
    lam = (U0 / profile.U[0]) ** ((q + 1) / N)
    return rescale_profile(profile, lam)


__all__ = [
    "ShootingOptions", "RadialProfile", "solve_ground_state", "evaluate_profile",
    "ode_residual", "fit_tail_exponents", "fit_derivative_tail_exponents",
    "rescale_profile", "closed_form_profile", "align_to_reference", "log_derivative",
    "RegimeTag",
]
