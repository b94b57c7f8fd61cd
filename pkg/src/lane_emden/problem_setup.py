"""Exponent arithmetic on the critical hyperbola and hypothesis checks.

The critical hyperbola in dimension ``N`` is

    1/(p+1) + 1/(q+1) = (N-2)/N,

and all the constructions of this package assume ``1 < p <= (N+2)/(N-2) <= q``.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

from .errors import DomainError

HYPERBOLA_TOL = 1e-12


def conjugate_exponent(N: int, p: float) -> float:
    """Return ``q`` such that ``(p, q)`` lies on the critical hyperbola.

    >>> conjugate_exponent(6, 2.0)
    2.0
    >>> round(conjugate_exponent(8, 1.25), 12)
    2.272727272727
    """
    if int(N) != N or N < 3:
        raise DomainError(f"dimension must be an integer >= 3, got {N!r}")
    if p <= -1:
        raise DomainError(f"exponent must exceed -1, got p={p!r}")
    # symmetric point is exact
    if p == (N + 2) / (N - 2):
        return float(p)
    inv = (N - 2) / N - 1.0 / (p + 1.0)
    if inv <= 0:
        raise DomainError(
            f"no conjugate exponent: (N-2)/N - 1/(p+1) = {inv:.3g} <= 0 for N={N}, p={p}"
        )
    return 1.0 / inv - 1.0


class RegimeTag(str, enum.Enum):
    ABOVE = "ABOVE"
    CRITICAL = "CRITICAL"
    BELOW = "BELOW"


@dataclass(frozen=True)
class CriticalPair:
    """Problem parameters ``(N, p, q, alpha, beta)`` on the critical hyperbola.

    ``q`` may be omitted, in which case it is computed from ``p``.  Inputs with
    ``p > q`` are swapped (together with ``alpha`` and ``beta``, which travel
    with their exponents) and a warning is emitted.
    """

    N: int
    p: float
    q: float | None = None
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        N = self.N
        if int(N) != N or N < 3:
            raise DomainError(f"dimension must be an integer >= 3, got {N!r}")
        object.__setattr__(self, "N", int(N))
        p = float(self.p)
        q = conjugate_exponent(N, p) if self.q is None else float(self.q)
        alpha, beta = float(self.alpha), float(self.beta)
        if p > q:
            warnings.warn(
                f"p={p} > q={q}: swapping to enforce p <= (N+2)/(N-2) <= q",
                stacklevel=3,
            )
            p, q = q, p
            alpha, beta = beta, alpha
        crit = (N + 2) / (N - 2)
        if not p > 1.0:
            raise DomainError(f"need p > 1, got p={p}")
        if p > crit + HYPERBOLA_TOL or q < crit - HYPERBOLA_TOL:
            raise DomainError(f"need p <= (N+2)/(N-2) <= q, got p={p}, q={q}")
        resid = abs(1.0 / (p + 1) + 1.0 / (q + 1) - (N - 2) / N)
        if resid > HYPERBOLA_TOL:
            raise DomainError(f"(p, q) = ({p}, {q}) is off the critical hyperbola by {resid:.3g}")
        if not (alpha > 0 and beta > 0):
            raise DomainError(f"alpha and beta must be positive, got {alpha}, {beta}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def symmetric(self) -> bool:
        return self.p == self.q

    def to_dict(self) -> dict:
        return {"N": self.N, "p": self.p, "q": self.q, "alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_dict(cls, d: dict) -> "CriticalPair":
        return cls(int(d["N"]), d["p"], d.get("q"), d.get("alpha", 1.0), d.get("beta", 1.0))


@dataclass(frozen=True)
class DecayRegime:
    """Far-field decay exponents of the ground state.

    ``U ~ r**u_tail_exponent * (log r)**log_factor`` and
    ``V ~ r**v_tail_exponent``; derivatives decay one power faster.
    """

    tag: RegimeTag
    u_tail_exponent: float
    v_tail_exponent: float
    log_factor: bool = False

    @property
    def du_tail_exponent(self) -> float:
        return self.u_tail_exponent - 1.0

    @property
    def dv_tail_exponent(self) -> float:
        return self.v_tail_exponent - 1.0

    def to_dict(self) -> dict:
        return {
            "tag": self.tag.value,
            "u_tail_exponent": self.u_tail_exponent,
            "v_tail_exponent": self.v_tail_exponent,
            "log_factor": self.log_factor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecayRegime":
        return cls(RegimeTag(d["tag"]), d["u_tail_exponent"], d["v_tail_exponent"], d["log_factor"])


def classify_regime(pair: CriticalPair) -> DecayRegime:
    N, p = pair.N, pair.p
    threshold = N / (N - 2)
    if abs(p - threshold) <= HYPERBOLA_TOL:
        return DecayRegime(RegimeTag.CRITICAL, 2.0 - N, 2.0 - N, True)
    if p > threshold:
        return DecayRegime(RegimeTag.ABOVE, 2.0 - N, 2.0 - N, False)
    return DecayRegime(RegimeTag.BELOW, 2.0 - (N - 2) * p, 2.0 - N, False)


def dual_exponents(pair: CriticalPair) -> tuple[float, float]:
    """Return ``(p*, q*)`` with ``1/p* = p/(p+1) - 1/N`` and ``1/q* = q/(q+1) - 1/N``."""
    N, p, q = pair.N, pair.p, pair.q
    inv_p = p / (p + 1) - 1.0 / N
    inv_q = q / (q + 1) - 1.0 / N
    if inv_p <= 0 or inv_q <= 0:
        raise DomainError(f"non-positive reciprocal dual exponent: 1/p*={inv_p}, 1/q*={inv_q}")
    return 1.0 / inv_p, 1.0 / inv_q


@dataclass(frozen=True)
class HypothesisReport:
    condition: str | None  # "i", "ii", "iii" or None
    conditions: dict = field(default_factory=dict)
    finite_constants: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.condition is not None

    @property
    def all_finite(self) -> bool:
        return all(self.finite_constants.values())

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "conditions": dict(self.conditions),
            "finite_constants": dict(self.finite_constants),
        }


def check_theorem_hypotheses(pair: CriticalPair) -> HypothesisReport:
    """Check which of the three dimension/exponent conditions of the existence result holds.

    (i)   N/(N-2) < p < (N+2)/(N-2) and N >= 8
    (ii)  p = (N+2)/(N-2) and N >= 10
    (iii) 1 < p < N/(N-2) and N >= 8
    """
    from .moments import integrability_precheck

    N, p = pair.N, pair.p
    lo, hi = N / (N - 2), (N + 2) / (N - 2)
    tol = HYPERBOLA_TOL
    conds = {
        "i": bool(lo + tol < p < hi - tol and N >= 8),
        "ii": bool(abs(p - hi) <= tol and N >= 10),
        "iii": bool(1 < p < lo - tol and N >= 8),
    }
    which = next((k for k, v in conds.items() if v), None)
    finite = integrability_precheck(classify_regime(pair), N, pair)
    return HypothesisReport(which, conds, finite)
