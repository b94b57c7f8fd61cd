"""Point geometry in normal coordinates: metric jets, curvature, fields a and h.

Every quantity used downstream depends only on data at the concentration
point: the second derivatives of the inverse metric in normal coordinates,
scalar curvature, and the jets of ``a`` and ``h``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateConstantsError, DomainError
from .moments import MomentConstants, k_constant
from .problem_setup import CriticalPair

SYM_TOL = 1e-12
CRITICAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MetricJet:
    """Second-order jet ``d2g[a, b, s, t] = d^2 g^{ab} / dy_s dy_t (0)`` in normal coordinates.

    ``g^{ab}(0) = delta_ab`` and first derivatives vanish, so only this
    array is stored.
    """

    N: int
    d2g: np.ndarray
    r0: float = 1.0

    def __post_init__(self):
        N = int(self.N)
        d = np.array(self.d2g, dtype=float)
        if d.shape != (N, N, N, N):
            raise DomainError(f"jet must have shape {(N,) * 4}, got {d.shape}")
        scale = max(1.0, float(np.abs(d).max()))
        if (np.abs(d - d.transpose(1, 0, 2, 3)).max() > SYM_TOL * scale
                or np.abs(d - d.transpose(0, 1, 3, 2)).max() > SYM_TOL * scale):
            raise DomainError("jet must be symmetric in (a, b) and in (s, t)")
        if not self.r0 > 0:
            raise DomainError("chart radius r0 must be positive")
        d.setflags(write=False)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "d2g", d)
        object.__setattr__(self, "r0", float(self.r0))

    def scaled(self, s: float) -> "MetricJet":
        return MetricJet(self.N, s * self.d2g, self.r0)


def flat_jet(N: int, r0: float = 1.0) -> MetricJet:
    return MetricJet(N, np.zeros((N,) * 4), r0)


def constant_curvature_jet(N: int, kappa: float, r0: float = 1.0) -> MetricJet:
    """Jet of ``g^{ab} = delta_ab + (kappa/3)(|y|^2 delta_ab - y_a y_b)``."""
    if N < 2:
        raise DomainError("need N >= 2")
    I = np.eye(N)
    d = (kappa / 3.0) * (2 * np.einsum("ab,st->abst", I, I)
                         - np.einsum("as,bt->abst", I, I)
                         - np.einsum("at,bs->abst", I, I))
    return MetricJet(N, d, r0)


def scalar_curvature_from_jet(jet: MetricJet) -> float:
    """``sum_{a,b} d2g[a,a,b,b] - sum_{a,b} d2g[a,b,a,b]``."""
    d = jet.d2g
    return float(np.einsum("aabb->", d) - np.einsum("abab->", d))


@dataclass(frozen=True, eq=False)
class PointGeometry:
    """Data at a candidate concentration point.

    ``scal`` defaults to the value implied by the jet and ``lap_a`` to the
    trace of ``hess_a``; explicit values must agree with those.
    """

    jet: MetricJet
    a_val: float
    grad_a: np.ndarray
    hess_a: np.ndarray
    h_val: float
    scal: float | None = None
    lap_a: float | None = None

    def __post_init__(self):
        N = self.jet.N
        g = np.array(self.grad_a, dtype=float).reshape(-1)
        H = np.array(self.hess_a, dtype=float)
        if g.shape != (N,) or H.shape != (N, N):
            raise DomainError(f"grad_a must have length {N} and hess_a shape ({N}, {N})")
        if np.abs(H - H.T).max() > SYM_TOL * max(1.0, np.abs(H).max()):
            raise DomainError("hess_a must be symmetric")
        if not self.a_val > 0:
            raise DomainError(f"a must be positive, got {self.a_val}")
        tr = float(np.trace(H))
        lap = tr if self.lap_a is None else float(self.lap_a)
        if abs(lap - tr) > 1e-10 * max(1.0, abs(tr)):
            raise DomainError(f"lap_a={lap} differs from trace(hess_a)={tr}")
        sc = scalar_curvature_from_jet(self.jet) if self.scal is None else float(self.scal)
        g.setflags(write=False)
        H.setflags(write=False)
        object.__setattr__(self, "grad_a", g)
        object.__setattr__(self, "hess_a", H)
        object.__setattr__(self, "a_val", float(self.a_val))
        object.__setattr__(self, "h_val", float(self.h_val))
        object.__setattr__(self, "lap_a", lap)
        object.__setattr__(self, "scal", sc)

    @property
    def N(self) -> int:
        return self.jet.N

    @property
    def critical_a(self) -> bool:
        return bool(np.linalg.norm(self.grad_a) <= CRITICAL_TOL * max(1.0, self.a_val))

    @property
    def nondegenerate_a(self) -> bool:
        ev = np.linalg.eigvalsh(self.hess_a)
        return bool(np.min(np.abs(ev)) > 1e-12 * max(1.0, np.max(np.abs(ev))))

    def to_dict(self) -> dict:
        return {
            "N": self.N, "scal": self.scal, "a": self.a_val, "grad_a": self.grad_a.tolist(),
            "hess_a": self.hess_a.tolist(), "lap_a": self.lap_a, "h": self.h_val,
            "critical_a": self.critical_a, "nondegenerate_a": self.nondegenerate_a,
            "r0": self.jet.r0,
        }


def flat_point(N: int, h: float = 1.0, a: float = 1.0, hess_a=None, r0: float = 1.0) -> PointGeometry:
    H = np.zeros((N, N)) if hess_a is None else hess_a
    return PointGeometry(flat_jet(N, r0), a, np.zeros(N), H, h)


@dataclass(frozen=True, eq=False)
class WarpedProductPoint:
    """Point of the base of a warped product ``M x_omega K``.

    ``hess_omega`` is optional; without it an isotropic Hessian with trace
    ``lap_omega`` is assumed when building ``D^2 a``.
    """

    jet: MetricJet
    h_val: float
    omega_val: float
    grad_omega: np.ndarray
    lap_omega: float
    fiber_dim: int
    hess_omega: np.ndarray | None = None

    def __post_init__(self):
        N = self.jet.N
        g = np.array(self.grad_omega, dtype=float).reshape(-1)
        if g.shape != (N,):
            raise DomainError(f"grad_omega must have length {N}")
        if not self.omega_val > 0:
            raise DomainError(f"omega must be positive, got {self.omega_val}")
        if int(self.fiber_dim) < 1:
            raise DomainError("fiber dimension must be >= 1")
        H = self.hess_omega
        if H is not None:
            H = np.array(H, dtype=float)
            if H.shape != (N, N) or abs(np.trace(H) - self.lap_omega) > 1e-10 * max(1, abs(self.lap_omega)):
                raise DomainError("hess_omega must be N x N with trace lap_omega")
        object.__setattr__(self, "grad_omega", g)
        object.__setattr__(self, "hess_omega", H)
        object.__setattr__(self, "fiber_dim", int(self.fiber_dim))


def minimal_fiber_check(wp: WarpedProductPoint, tol: float = 1e-10) -> bool:
    """The fiber over the point is minimal iff omega is critical there."""
    return bool(np.linalg.norm(wp.grad_omega) <= tol)


def warped_to_point(wp: WarpedProductPoint) -> PointGeometry:
    """Point data for ``a = omega^N`` by the chain rule."""
    N = wp.jet.N
    w, g = wp.omega_val, wp.grad_omega
    Hw = wp.hess_omega if wp.hess_omega is not None else (wp.lap_omega / N) * np.eye(N)
    grad_a = N * w ** (N - 1) * g
    hess_a = N * w ** (N - 1) * Hw + N * (N - 1) * w ** (N - 2) * np.outer(g, g)
    hess_a = 0.5 * (hess_a + hess_a.T)
    lap_a = N * w ** (N - 1) * wp.lap_omega + N * (N - 1) * w ** (N - 2) * float(g @ g)
    return PointGeometry(wp.jet, w**N, grad_a, hess_a, wp.h_val, lap_a=lap_a)


def _require_l3(consts: MomentConstants):
    if consts.L3 == 0 or not np.isfinite(consts.L3):
        raise DegenerateConstantsError("L3 must be finite and non-zero")


def sigma_gamma(wp: WarpedProductPoint, consts: MomentConstants, pair: CriticalPair):
    """Return ``(Sigma, h > Sigma)`` for the warped-product criterion."""
    _require_l3(consts)
    K = k_constant(consts, pair)
    scal = scalar_curvature_from_jet(wp.jet)
    N = wp.jet.N
    sigma = K * scal / (6 * N * consts.L3) - K * wp.lap_omega / (2 * consts.L3 * wp.omega_val)
    return float(sigma), bool(wp.h_val > sigma)


# -------------------------------------------------------------- ingestion


def _parse_jet(N: int, desc, r0: float) -> MetricJet:
    if desc is None or desc == "flat":
        return flat_jet(N, r0)
    if isinstance(desc, dict):
        if "constant_curvature" in desc:
            return constant_curvature_jet(N, float(desc["constant_curvature"]), r0)
        if "d2g" in desc:
            return MetricJet(N, np.array(desc["d2g"]), r0)
        raise DomainError(f"unknown jet descriptionification keys {sorted(desc)}")
    return MetricJet(N, np.array(desc), r0)


def point_from_dict(doc: dict):
    """Parse a point document.

    Returns ``(PointGeometry, WarpedProductPoint or None)``.  With a
    ``warped`` block the field ``a`` is derived as ``omega^N`` and must not be
    given separately.
    """
    try:
        N = int(doc["N"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError("point document needs an integer N") from exc
    r0 = float(doc.get("r0", 1.0))
    jet = _parse_jet(N, doc.get("jet", "flat"), r0)
    h = float(doc.get("h", 0.0))
    if "warped" in doc:
        if "a" in doc:
            raise DomainError("give either 'a' or 'warped', not both")
        w = doc["warped"]
        wp = WarpedProductPoint(
            jet, h, float(w["omega"]), np.array(w.get("grad", np.zeros(N)), dtype=float),
            float(w.get("lap", 0.0)), int(w.get("fiber_dim", 1)),
            None if w.get("hess") is None else np.array(w["hess"], dtype=float),
        )
        return warped_to_point(wp), wp
    a = doc.get("a", {})
    pt = PointGeometry(
        jet, float(a.get("value", 1.0)), np.array(a.get("grad", np.zeros(N)), dtype=float),
        np.array(a.get("hess", np.zeros((N, N))), dtype=float), h,
    )
    return pt, None


def load_point(path) -> tuple:
    return point_from_dict(json.loads(Path(path).read_text()))
