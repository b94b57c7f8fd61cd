"""Positive-weight cubature on the unit sphere S^(N-1).

Rules are unions of orbits of the hyperoctahedral group (signed coordinate
permutations).  Any polynomial integrated against such a rule reduces to
its symmetrized part, which is a combination of products of power sums
``sum_i x_i^(2k)``.  Orbit weights are therefore fixed by matching the
exact sphere averages of those products up to the requested degree; a
linear program picks a non-negative solution with few points.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, QuadratureError


def _partitions(n: int, max_part: int | None = None):
    max_part = n if max_part is None else max_part
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sp in _set_partitions(rest):
        for i in range(len(sp)):
            yield sp[:i] + [[first] + sp[i]] + sp[i + 1:]
        yield [[first]] + sp


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def sphere_mean_power_sums(mu: tuple, N: int) -> float:
    """Average over S^(N-1) of ``prod_j sum_i x_i^(2 mu_j)``.

    Expands the product over coincidence patterns of the summation indices
    and uses ``E[prod x_i^(2k_i)] = prod (2k_i - 1)!! / (N (N+2) ... (N + 2K - 2))``.
    """
    K = sum(mu)
    den = math.prod(N + 2 * i for i in range(K))
    total = 0
    for sp in _set_partitions(list(range(len(mu)))):
        b = len(sp)
        if b > N:
            continue
        num = math.prod(_double_factorial(2 * sum(mu[i] for i in blk) - 1) for blk in sp)
        total += math.perm(N, b) * num
    return total / den


def _orbit_size(g: tuple) -> int:
    N = len(g)
    nz = sum(1 for x in g if x)
    size = math.factorial(N)
    for k in set(g):
        size //= math.factorial(g.count(k))
    return size * 2**nz


def _distinct_permutations(values):
    """Distinct permutations of a multiset, in lexicographic order."""
    vals = sorted(values)
    n = len(vals)
    while True:
        yield tuple(vals)
        i = n - 2
        while i >= 0 and vals[i] >= vals[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while vals[j] <= vals[i]:
            j -= 1
        vals[i], vals[j] = vals[j], vals[i]
        vals[i + 1:] = reversed(vals[i + 1:])


def _orbit_points(g: tuple) -> np.ndarray:
    base = np.array(g, dtype=float)
    base /= np.linalg.norm(base)
    pts = []
    for perm in _distinct_permutations(list(base)):
        perm = np.array(perm)
        nz = np.nonzero(perm)[0]
        for signs in itertools.product((1.0, -1.0), repeat=nz.size):
            v = perm.copy()
            v[nz] *= signs
            pts.append(v)
    return np.array(pts)


@lru_cache(maxsize=None)
def _orbit_weights(N: int, degree: int, max_entry: int):
    m = (degree - 1) // 2  # rule is odd-symmetric, so only even degrees 2k <= degree matter
    rows = [mu for k in range(m + 1) for mu in _partitions(k)]
    gens = [g for g in itertools.combinations_with_replacement(range(max_entry, -1, -1), N)
            if sum(g) and math.gcd(*g) == 1]
    A = np.empty((len(rows), len(gens)))
    for j, g in enumerate(gens):
        x2 = np.array(g, dtype=float) ** 2
        x2 /= x2.sum()
        for i, mu in enumerate(rows):
            A[i, j] = math.prod(float(np.sum(x2**e)) for e in mu)
    b = np.array([sphere_mean_power_sums(mu, N) for mu in rows])
    cost = np.array([_orbit_size(g) for g in gens], dtype=float)
    res = linprog(cost, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise QuadratureError(f"no symmetric rule of degree {degree} in dimension {N}")
    sel = [j for j in range(len(gens)) if res.x[j] > 1e-14]
    return tuple((gens[j], float(res.x[j])) for j in sel), float(np.abs(A @ res.x - b).max())


@lru_cache(maxsize=None)
def _sphere_rule_cached(N: int, degree: int):
    if N < 2:
        raise DomainError("need N >= 2")
    if degree < 1:
        raise DomainError("degree must be positive")
    for max_entry in (2, 3, 4):
        try:
            orbits, _ = _orbit_weights(N, degree, max_entry)
            break
        except QuadratureError:
            continue
    else:
        raise QuadratureError(f"no symmetric rule of degree {degree} in dimension {N}")
    pts, wts = [], []
    for g, w in orbits:
        P = _orbit_points(g)
        pts.append(P)
        wts.append(np.full(P.shape[0], w / P.shape[0]))
    P, W = np.vstack(pts), np.concatenate(wts)
    W /= math.fsum(W)
    P.setflags(write=False)
    W.setflags(write=False)
    return P, W


def sphere_rule(N: int, degree: int = 7):
    """Nodes (``n x N``) and weights (summing to 1) exact for polynomials up to ``degree``.

    Weights average over the sphere; multiply by its area for integrals.
    """
    return _sphere_rule_cached(int(N), int(degree))
