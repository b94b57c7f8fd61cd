"""Residuals of the linearized system on the kernel elements of the ground state.

The linearization at ``(U, V)`` is

    psi'' + (N-1)/r psi' - l(l+N-2)/r^2 psi + p V^(p-1) phi = 0,
    phi'' + (N-1)/r phi' - l(l+N-2)/r^2 phi + q U^(q-1) psi = 0,

for angular modes of degree ``l``.  The dilation mode ``(r U' + N U/(q+1),
r V' + N V/(p+1))`` solves it with ``l = 0``, the radial part ``(U', V')`` of
the translation modes with ``l = 1``.  Second derivatives come from
differencing analytically known fluxes built from the stored arrays.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .ground_state import RadialProfile, log_derivative

TRANSLATION_R_MIN = 1e-2
WEIGHT_DESCRIPTOR = "sup |residual| / (1 + V^(p-1) + U^(q-1)) over interior nodes"


@dataclass(frozen=True)
class KernelResidualReport:
    mode0_residual: float
    mode1_residual: float
    weighted_norm: str = WEIGHT_DESCRIPTOR

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _arrays(profile: RadialProfile):
    r = profile.grid[1:]
    return (r, np.log(r), profile.U[1:], profile.V[1:], profile.dU[1:], profile.dV[1:])


def _weight(U, V, p, q):
    return 1.0 + V ** (p - 1) + U ** (q - 1)


def dilation_mode_residual(profile: RadialProfile) -> float:
    """Weighted sup residual of the dilation mode (``l = 0``)."""
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    eu, ev = N / (q + 1), N / (p + 1)
    r, s, U, V, dU, dV = _arrays(profile)
    psi, phi = r * dU + eu * U, r * dV + ev * V
    # psi' = (2 - N + eu) U' - r V^p from the radial equation
    flux_psi = r ** (N - 1) * ((2 - N + eu) * dU - r * V**p)
    flux_phi = r ** (N - 1) * ((2 - N + ev) * dV - r * U**q)
    sl, d_psi = log_derivative(flux_psi, s, N)
    _, d_phi = log_derivative(flux_phi, s, N)
    rN = r[sl] ** N
    res = (np.abs(d_psi / rN + p * V[sl] ** (p - 1) * phi[sl])
           + np.abs(d_phi / rN + q * U[sl] ** (q - 1) * psi[sl]))
    return float(np.max(res / _weight(U[sl], V[sl], p, q)))


def translation_mode_residual(profile: RadialProfile, r_min: float = TRANSLATION_R_MIN) -> float:
    """Weighted sup residual of the ``l = 1`` mode ``(U', V')`` for ``r >= r_min``.

    Uses ``psi'' + (N-1)/r psi' - (N-1)/r^2 psi = r^(-N) (r^(N+1) f')'`` with
    ``f = psi / r``, which is regular at the origin.
    """
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    r, s, U, V, dU, dV = _arrays(profile)
    fu, fv = dU / r, dV / r
    # r^(N+1) f' with f' = -(V^p + N f) / r
    flux_u = -(r**N) * (V**p + N * fu)
    flux_v = -(r**N) * (U**q + N * fv)
    sl, d_u = log_derivative(flux_u, s, N + 2)
    _, d_v = log_derivative(flux_v, s, N + 2)
    rr = r[sl]
    rN1 = rr ** (N + 1)
    res = (np.abs(d_u / rN1 + p * V[sl] ** (p - 1) * dV[sl])
           + np.abs(d_v / rN1 + q * U[sl] ** (q - 1) * dU[sl]))
    res = res / _weight(U[sl], V[sl], p, q)
    return float(np.max(res[rr >= r_min]))


def kernel_report(profile: RadialProfile) -> KernelResidualReport:
    return KernelResidualReport(dilation_mode_residual(profile), translation_mode_residual(profile))
