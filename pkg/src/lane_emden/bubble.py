"""Bubbles in normal coordinates and direct quadrature of the energy.

In the chart ``y`` around the concentration point, with ``z = y/delta - eta``,

    W = chi(|y|) delta^(-N/(q+1)) U(|z|),    H = chi(|y|) delta^(-N/(p+1)) V(|z|),

and the energy is

    J_eps = int_{|y| < r0} [ a g^{ab} d_a W d_b H + a h W H
                             - a H^(p+1-alpha eps)/(p+1-alpha eps)
                             - a W^(q+1-beta eps)/(q+1-beta eps) ] sqrt(det g) dy

with ``g^{ab} = delta_ab + d2g[a,b,s,t] y_s y_t / 2`` and
``a(y) = a + y^T D^2a y / 2``.  The quadrature is a product of Gauss-Legendre
rules on the profile's radial cells (in ``|z|``) and a symmetric sphere rule.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, QuadratureError
from .geometry import PointGeometry
from .ground_state import RadialProfile, evaluate_profile
from .moments import MomentConstants, sphere_area
from .problem_setup import CriticalPair
from .reduced import ReducedCoefficients, psi
from .sphere import sphere_rule

DELTA_GUARD = 0.1


def smoothstep(x):
    """``6x^5 - 15x^4 + 10x^3`` clamped to [0, 1]."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10 - 15 * x + 6 * x * x)


def cutoff(rho, r0: float):
    """``chi`` and ``chi'`` as functions of ``|y|``: 1 on [0, r0/2], 0 beyond r0, C^2."""
    rho = np.asarray(rho, dtype=float)
    x = (rho - 0.5 * r0) / (0.5 * r0)
    xc = np.clip(x, 0.0, 1.0)
    chi = 1.0 - smoothstep(x)
    dchi = -30 * xc**2 * (1 - xc) ** 2 / (0.5 * r0)
    return chi, dchi


@dataclass(frozen=True, eq=False)
class BubbleParams:
    delta: float
    eta: np.ndarray
    r0: float = 1.0
    cutoff_profile: str = "smoothstep-C2"

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if not self.r0 > 0:
            raise DomainError("r0 must be positive")
        e = np.array(self.eta, dtype=float).reshape(-1)
        e.setflags(write=False)
        object.__setattr__(self, "eta", e)


def _scales(pair: CriticalPair):
    return pair.N / (pair.q + 1), pair.N / (pair.p + 1)


def _check_dim(params, profile, y):
    N = profile.pair.N
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != N or params.eta.shape != (N,):
        raise DomainError(f"points and eta must have dimension {N}")
    return y


def eval_bubble(profile: RadialProfile, params: BubbleParams, y):
    """``(W, H)`` at chart point(s) ``y`` (shape ``(..., N)``)."""
    y = _check_dim(params, profile, y)
    eu, ev = _scales(profile.pair)
    d = params.delta
    z = np.linalg.norm(y / d - params.eta, axis=-1)
    chi, _ = cutoff(np.linalg.norm(y, axis=-1), params.r0)
    U, V, _, _ = evaluate_profile(profile, z)
    W, H = chi * d**-eu * U, chi * d**-ev * V
    if np.ndim(W) == 0:
        return float(W), float(H)
    return W, H


def eval_kernel_element(profile: RadialProfile, i: int, params: BubbleParams, y):
    """Cut-off, rescaled kernel element ``(Psi_i, Phi_i)`` at ``y``.

    ``i = 0`` is the dilation mode ``(z.grad U + N U/(q+1), z.grad V + N V/(p+1))``,
    ``1 <= i <= N`` the translation modes ``(d_i U, d_i V)``.
    """
    N = profile.pair.N
    if not (isinstance(i, (int, np.integer)) and 0 <= i <= N):
        raise DomainError(f"kernel index must be in 0..{N}, got {i!r}")
    y = _check_dim(params, profile, y)
    eu, ev = _scales(profile.pair)
    d = params.delta
    zv = y / d - params.eta
    z = np.linalg.norm(zv, axis=-1)
    chi, _ = cutoff(np.linalg.norm(y, axis=-1), params.r0)
    U, V, dU, dV = evaluate_profile(profile, z)
    if i == 0:
        a, b = z * dU + eu * U, z * dV + ev * V
    else:
        zi = zv[..., i - 1]
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(z > 0, zi / np.where(z > 0, z, 1.0), 0.0)
        a, b = dU * unit, dV * unit
    P, F = chi * d**-eu * a, chi * d**-ev * b
    if np.ndim(P) == 0:
        return float(P), float(F)
    return P, F


def kernel_gram(profile: RadialProfile, degree: int = 7, n_gauss: int = 8) -> np.ndarray:
    """Weighted Gram matrix ``int p V^(p-1) Phi_i Phi_l + q U^(q-1) Psi_i Psi_l`` over R^N.

    Uses the uncut, unscaled kernel elements on ``|z| <= r_max``.
    """
    pair = profile.pair
    N, p, q = pair.N, pair.p, pair.q
    eu, ev = _scales(pair)
    r, w = _radial_nodes(profile, profile.r_max, (), n_gauss)
    U, V, dU, dV = evaluate_profile(profile, r)
    P, Wa = sphere_rule(N, degree)
    # radial parts (dilation, translation) and angular factors (1, omega_l)
    rad_psi = np.vstack([r * dU + eu * U, dU])
    rad_phi = np.vstack([r * dV + ev * V, dV])
    ang = np.hstack([np.ones((P.shape[0], 1)), P])  # (n_ang, N+1)
    kind = np.array([0] + [1] * N)
    G = np.empty((N + 1, N + 1))
    wv = p * V ** (p - 1) * w
    wu = q * U ** (q - 1) * w
    area = sphere_area(N)
    for i in range(N + 1):
        for l in range(N + 1):
            radial = (math.fsum(wv * rad_phi[kind[i]] * rad_phi[kind[l]])
                      + math.fsum(wu * rad_psi[kind[i]] * rad_psi[kind[l]]))
            angular = math.fsum(Wa * ang[:, i] * ang[:, l])
            G[i, l] = area * radial * angular
    return G


# ----------------------------------------------------------- quadrature


def _radial_nodes(profile: RadialProfile, x_max: float, breaks, n: int):
    """GL nodes/weights (weights include ``x^(N-1)``) on the profile cells up to ``x_max``."""
    N = profile.pair.N
    g = profile.grid
    edges = g[g < x_max]
    if x_max > g[-1]:
        ratio = g[-1] / g[-2]
        extra = g[-1] * ratio ** np.arange(1, int(math.ceil(math.log(x_max / g[-1]) / math.log(ratio))) + 1)
        edges = np.concatenate([edges, extra[extra < x_max]])
    edges = np.unique(np.concatenate([edges, [x_max], [b for b in breaks if 0 < b < x_max]]))
    x, w = np.polynomial.legendre.leggauss(n)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    r = (lo[:, None] + half[:, None] * (x[None, :] + 1)).ravel()
    wr = (half[:, None] * w[None, :]).ravel() * r ** (N - 1)
    return r, wr


def _positive_power(base, expo):
    out = np.zeros_like(base)
    m = base > 0
    out[m] = base[m] ** expo
    return out


def energy_quadrature(profile: RadialProfile, params: BubbleParams, point: PointGeometry,
                      pair: CriticalPair, eps: float, *, degree: int = 7, n_gauss: int = 8,
                      frame: np.ndarray | None = None, tol: float | None = None,
                      chunk: int = 2048) -> float:
    """Evaluate ``J_eps(W, H)`` by product quadrature.

    Radial nodes sit on the profile's grid cells in ``|z|`` (split at the
    cutoff radii when ``eta = 0``), so every cell sees a smooth interpolant.
    ``frame`` rotates the sphere rule.  With ``tol`` the result is compared
    against a half-order radial rule and a :class:`QuadratureError` is raised
    when they differ by more than ``tol`` relative.
    """
    if eps < 0:
        raise DomainError("eps must be non-negative")
    N = pair.N
    if point.N != N or profile.pair.N != N or params.eta.shape != (N,):
        raise DomainError("profile, point and bubble must share the dimension")
    val = _energy(profile, params, point, pair, eps, degree, n_gauss, frame, chunk)
    if tol is not None:
        coarse = _energy(profile, params, point, pair, eps, degree, max(2, n_gauss // 2), frame, chunk)
        err = abs(val - coarse) / max(abs(val), 1e-300)
        if err > tol:
            raise QuadratureError(
                f"radial refinement changed J by {err:.3g} (tolerance {tol:.3g})",
                [{"n_gauss": n_gauss, "J": val}, {"n_gauss": max(2, n_gauss // 2), "J": coarse}],
            )
    return val


def _energy(profile, params, point, pair, eps, degree, n_gauss, frame, chunk):
    N, p, q = pair.N, pair.p, pair.q
    d, r0, eta = params.delta, params.r0, params.eta
    eu, ev = _scales(pair)
    s_v, s_u = p + 1 - pair.alpha * eps, q + 1 - pair.beta * eps
    log_d = math.log(d)
    eta_n = float(np.linalg.norm(eta))
    centered = eta_n == 0.0
    breaks = (0.5 * r0 / d, r0 / d) if centered else ()
    x, wx = _radial_nodes(profile, r0 / d + eta_n, breaks, n_gauss)
    U, V, dU, dV = evaluate_profile(profile, x)

    P, Wa = sphere_rule(N, degree)
    if frame is not None:
        Q = np.asarray(frame, dtype=float)
        if Q.shape != (N, N) or np.abs(Q @ Q.T - np.eye(N)).max() > 1e-12:
            raise DomainError("frame must be an orthogonal N x N matrix")
        P = P @ Q.T
    T = point.jet.d2g
    Ha = point.hess_a
    flat = not np.any(T)
    h = point.h_val
    total = []
    for start in range(0, P.shape[0], chunk):
        om = P[start:start + chunk]
        wa = Wa[start:start + chunk]
        v = eta[None, None, :] + x[None, :, None] * om[:, None, :]  # (k, m, N)
        rho = d * np.linalg.norm(v, axis=-1)
        chi, dchi = cutoff(rho, r0)
        vn = np.linalg.norm(v, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            yhat = np.where(vn[..., None] > 0, v / np.where(vn > 0, vn, 1.0)[..., None], om[:, None, :])
        dot = np.einsum("kmn,kn->km", yhat, om)
        if flat:
            g_zz, g_yz, g_yy = 1.0, dot, 1.0
            sqrt_det = 1.0
        else:
            M = 0.5 * d * d * np.einsum("abst,kms,kmt->kmab", T, v, v, optimize=True)
            g_zz = 1 + np.einsum("ka,kmab,kb->km", om, M, om, optimize=True)
            g_yz = dot + np.einsum("kma,kmab,kb->km", yhat, M, om, optimize=True)
            g_yy = 1 + np.einsum("kma,kmab,kmb->km", yhat, M, yhat, optimize=True)
            sign, logdet = np.linalg.slogdet(np.eye(N) + M)
            if np.any(sign <= 0):
                raise DomainError("truncated inverse metric is not positive definite on the chart; reduce r0")
            sqrt_det = np.exp(-0.5 * logdet)
        a_y = point.a_val + 0.5 * d * d * np.einsum("kma,ab,kmb->km", v, Ha, v, optimize=True)
        # z-direction gradients carry no delta factor after scaling; cutoff gradients carry delta
        grad = (chi**2 * dU * dV * g_zz
                + d * chi * dchi * (U * dV + dU * V) * g_yz
                + d * d * dchi**2 * U * V * g_yy)
        mass = d * d * h * chi**2 * U * V
        lin_v = np.exp((N - ev * s_v) * log_d) / s_v
        lin_u = np.exp((N - eu * s_u) * log_d) / s_u
        nonlin = lin_v * _positive_power(chi * V, s_v) + lin_u * _positive_power(chi * U, s_u)
        dens = a_y * sqrt_det * (grad + mass - nonlin)
        total.append(math.fsum((dens @ wx) * wa))
    return float(sphere_area(N) * math.fsum(total))


# ----------------------------------------------------------- validation


@dataclass
class ValidationTable:
    rows: list = field(default_factory=list)  # (eps, J_quad, J_expansion, residual, residual_over_eps)

    @property
    def ratios(self):
        return [r[4] for r in self.rows]

    @property
    def verdict(self) -> str:
        """PASS iff ``|residual|/eps`` strictly decreases along the schedule."""
        vals = self.ratios
        if len(vals) < 2:
            return "INDETERMINATE"
        return "PASS" if all(b < a for a, b in zip(vals, vals[1:])) else "FAIL"

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["eps", "J_quad", "J_expansion", "residual", "residual_over_eps"])
        for row in self.rows:
            wr.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def expansion_validation(profile: RadialProfile, point: PointGeometry, pair: CriticalPair,
                         consts: MomentConstants, coeffs: ReducedCoefficients, t: float, eta,
                         eps_schedule=(0.04, 0.02, 0.01, 0.005), *, degree: int = 7,
                         n_gauss: int = 8, tol: float | None = None) -> ValidationTable:
    """Compare the quadrature energy with its small-``eps`` expansion.

    Raises
    ------
    DomainError
        If some ``delta = sqrt(eps t)`` violates ``delta / r0 < 0.1``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    N = pair.N
    eta = np.zeros(N) if eta is None else np.asarray(eta, dtype=float)
    r0 = point.jet.r0
    for eps in eps_schedule:
        if not eps > 0:
            raise DomainError("schedule entries must be positive")
        if math.sqrt(eps * t) / r0 >= DELTA_GUARD:
            raise DomainError(f"delta/r0 = {math.sqrt(eps * t) / r0:.3g} >= {DELTA_GUARD} at eps={eps}; "
                              "use a larger chart radius or smaller eps")
    lead = 2.0 / N * consts.L1
    ps = psi(t, eta, point, consts, coeffs, pair)
    table = ValidationTable()
    for eps in eps_schedule:
        params = BubbleParams(math.sqrt(eps * t), eta, r0)
        Jq = energy_quadrature(profile, params, point, pair, eps, degree=degree, n_gauss=n_gauss, tol=tol)
        Je = point.a_val * (lead + coeffs.c1 * eps - coeffs.c2 * eps * math.log(eps) + ps * eps)
        res = Jq - Je
        table.rows.append((float(eps), Jq, Je, res, abs(res) / eps))
    return table
