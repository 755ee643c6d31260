"""Independent reference implementations used by the tests.

Each oracle takes a different route from the library code: brute-force
enumeration, dense matrices, or closed forms evaluated with numpy/scipy.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def f_direct(n: int, N: int, K: int, z2: float) -> float:
    return (1 - z2) ** K * z2 ** n * math.comb(n + K - 1, n) / math.comb(n + N - 1, n)


def p_series(n: int, N: int, z2: float, K: int = 1, terms: int | None = None) -> float:
    """Single-mode marginal by summing f over the photons in the other modes."""
    if N == 1:
        return f_direct(n, 1, K, z2)
    if terms is None:
        terms = int(60 / max(-math.log10(z2), 1e-3)) + 200
    total = 0.0
    for m in range(terms):
        L = n + m
        log_t = (K * math.log(1 - z2) + L * math.log(z2)
                 + math.lgamma(L + K) - math.lgamma(K) - math.lgamma(L + 1)
                 - (math.lgamma(L + N) - math.lgamma(N) - math.lgamma(L + 1))
                 + math.lgamma(m + N - 1) - math.lgamma(N - 1) - math.lgamma(m + 1))
        total += math.exp(log_t)
    return total


def stars_and_bars(n: int, N: int):
    """Every N-mode Fock string with n photons, from bar positions."""
    for bars in itertools.combinations(range(n + N - 1), N - 1):
        edges = (-1,) + bars + (n + N - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(N))


def fidelity_compositions(N: int, z2: float, cutoff: int) -> float:
    """sum over every Fock string with <= cutoff photons of sqrt(f(n) prod p(x_i))."""
    sp = [math.sqrt(p_series(k, N, z2)) for k in range(cutoff + 1)]
    total = []
    for n in range(cutoff + 1):
        head = math.sqrt(f_direct(n, N, 1, z2))
        total.extend(head * math.prod(sp[k] for k in x) for x in stars_and_bars(n, N))
    return math.fsum(total)


def fidelity_polypower(N: int, z2: float, cutoff: int) -> float:
    """Same sum, grouped by n: the coefficient of t^n in (sum_k sqrt(p_k) t^k)^N."""
    sp = np.sqrt([p_series(k, N, z2) for k in range(cutoff + 1)])
    res = np.zeros(cutoff + 1)
    res[0] = 1.0
    base = sp.copy()
    e = N
    while e:
        if e & 1:
            res = np.convolve(res, base)[:cutoff + 1]
        base = np.convolve(base, base)[:cutoff + 1]
        e >>= 1
    f = np.array([f_direct(n, N, 1, z2) for n in range(cutoff + 1)])
    return float(np.sum(np.sqrt(f) * res))


def partition_count(n: int, max_parts: int) -> int:
    """Partitions of n into at most max_parts parts (= parts of size <= max_parts)."""
    table = [1] + [0] * n
    for part in range(1, max_parts + 1):
        for total in range(part, n + 1):
            table[total] += table[total - part]
    return table[n]


def window_states(N: int, lo: int, hi: int):
    return [x for x in itertools.product(range(hi + 1), repeat=N) if lo <= sum(x) <= hi]


def alpha_bruteforce(X: int, N: int, lo: int, hi: int) -> int:
    """d_A^2 tr[rho_X^2] from explicit marginal counts of the window states."""
    counts: dict = {}
    for x in window_states(N, lo, hi):
        counts[x[:X]] = counts.get(x[:X], 0) + 1
    return sum(c * c for c in counts.values())


def alpha_triple_sum(X: int, N: int, lo: int, hi: int) -> int:
    """sum over (n, n', m) of C(m+X-1, m) C(n-m+Y-1, n-m) C(n'-m+Y-1, n'-m)."""
    Y = N - X
    total = 0
    for n in range(lo, hi + 1):
        for n2 in range(lo, hi + 1):
            for m in range(min(n, n2) + 1):
                total += (math.comb(m + X - 1, m) * math.comb(n - m + Y - 1, n - m)
                          * math.comb(n2 - m + Y - 1, n2 - m))
    return total


def r_opt_objective(r: float, x: float, m: float) -> float:
    return 2 * m * math.log(r) + x * math.log(1 + r) + (2 - x) * math.log(1 - r)


def thermal_truncated(z2: float, cutoff: int) -> np.ndarray:
    return np.diag([(1 - z2) * z2 ** n for n in range(cutoff + 1)])
