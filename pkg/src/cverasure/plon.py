"""Haar-averaged output of a random passive linear optical network.

The input is K two-mode squeezed vacua feeding K of the N network modes,
with vacuum on the rest.  Averaging over the network leaves

    rho_RA = sum_n (1 - z2)^K z2^n / C(n+N-1, n) * Pi_K(n)_R (x) Pi_N(n)_A

so every N-mode Fock state with n photons carries weight f(n) on A.  The
fidelity of that state to the product of its single-mode marginals is
summed over bounded integer partitions with multinomial degeneracies.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

from .numerics import (DomainError, LogReal, gauss_2f1, ln_binomial,
                       log_binomial, partition_walk)

DEFAULT_MASS = 0.999
# Truncation of the infinite sums behind p_single and reduced states.
SERIES_TAIL = 1e-14


def _check(N: int, K: int, z2: float) -> None:
    if N < 1 or not 0 <= K <= N:
        raise DomainError(f"need N >= 1 and 0 <= K <= N, got N={N}, K={K}")
    if not 0.0 <= z2 < 1.0:
        raise DomainError(f"z2 must lie in [0, 1), got {z2}")


def ln_f_coeff(n: int, N: int, K: int, z2: float) -> float:
    _check(N, K, z2)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if K == 0 or z2 == 0.0:
        return 0.0 if n == 0 else -math.inf
    return (K * math.log(1.0 - z2) + n * math.log(z2)
            + ln_binomial(n + K - 1, n) - ln_binomial(n + N - 1, n))


def f_coeff(n: int, N: int, K: int, z2: float) -> float:
    """Weight of each n-photon Fock state in the averaged state on A."""
    return math.exp(ln_f_coeff(n, N, K, z2))


def _thermal_sector_mass(n: int, K: int, z2: float) -> float:
    """Probability of n photons in K thermal modes."""
    if K == 0:
        return 1.0 if n == 0 else 0.0
    if z2 == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(K * math.log(1.0 - z2) + n * math.log(z2) + ln_binomial(n + K - 1, n))


def photon_mass(n_cutoff: int, K: int, z2: float) -> float:
    """Probability of at most n_cutoff photons in total (independent of N)."""
    if K == 1:
        return 1.0 - z2 ** (n_cutoff + 1)
    return math.fsum(_thermal_sector_mass(n, K, z2) for n in range(n_cutoff + 1))


def cutoff_for_mass(z2: float, K: int, N: int, target_mass: float = DEFAULT_MASS) -> int:
    """Smallest total-photon cutoff holding at least ``target_mass`` of the state."""
    _check(N, K, z2)
    if not 0.0 < target_mass < 1.0:
        raise DomainError(f"target_mass must lie in (0, 1), got {target_mass}")
    n = 0
    if K == 1:
        while 1.0 - z2 ** (n + 1) < target_mass:
            n += 1
        return n
    acc = _thermal_sector_mass(0, K, z2)
    while acc < target_mass:
        n += 1
        acc += _thermal_sector_mass(n, K, z2)
    return n


def _tail_cutoff(start: int, K: int, z2: float, tail: float) -> int:
    """Smallest c >= start with thermal mass beyond c at most ``tail``."""
    c = start
    while 1.0 - photon_mass(c, K, z2) > tail:
        c += 1
    return c


@lru_cache(maxsize=65536)
def _p_single_k1(n: int, N: int, z2: float) -> float:
    if N == 1:
        return (1.0 - z2) * z2 ** n
    F = gauss_2f1(n + 1, N - 1, n + N, z2)
    return math.exp(math.log(1.0 - z2) + n * math.log(z2) - ln_binomial(n + N - 1, n)) * F


def p_single_with_tail(n: int, N: int, K: int, z2: float,
                       cutoff_m: int | None = None) -> tuple[float, float]:
    """Single-mode marginal p(n) and an upper bound on the dropped tail.

    K = 1 uses the closed hypergeometric form (tail 0).  Otherwise the sum
    over the other modes' photons runs to ``cutoff_m``.
    """
    _check(N, K, z2)
    if K < 1:
        raise DomainError("p_single needs K >= 1")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if K == 1:
        return _p_single_k1(n, N, z2), 0.0
    if N == 1:
        return f_coeff(n, 1, K, z2), 0.0
    if cutoff_m is None:
        cutoff_m = max(_tail_cutoff(n, K, z2, SERIES_TAIL) - n, 0)
    terms = []
    for m in range(cutoff_m + 1):
        L = n + m
        terms.append(math.exp(ln_f_coeff(L, N, K, z2) + ln_binomial(m + N - 2, m)))
    tail = max(1.0 - photon_mass(n + cutoff_m, K, z2), 0.0)
    return math.fsum(terms), tail


def p_single(n: int, N: int, K: int, z2: float, cutoff_m: int | None = None) -> float:
    """Photon-number distribution of one output mode."""
    return p_single_with_tail(n, N, K, z2, cutoff_m)[0]


def q_joint(m_tot: int, N: int, z2: float) -> float:
    """Diagonal entry of the K = 1 averaged state on A for any Fock string
    with m_tot photons.  It equals f(m_tot)."""
    return f_coeff(m_tot, N, 1, z2)


def q_joint_displayed(m_tot: int, N: int, z2: float) -> float:
    """The hypergeometric expression sometimes quoted for :func:`q_joint`.

    Kept for comparison only: it is not normalised (see the tests).
    """
    _check(N, 1, z2)
    F = gauss_2f1(1, m_tot, m_tot + N, z2)
    return (1.0 - z2) * z2 ** m_tot * F / math.exp(ln_binomial(m_tot + N - 1, m_tot))


def avg_state_reduced_M_with_tail(M: int, N: int, K: int, z2: float, m: int,
                                  n_cutoff: int | None = None) -> tuple[float, float]:
    """Coefficient of Pi_M(m) in the M-mode marginal, plus a tail bound."""
    _check(N, K, z2)
    if not 1 <= M <= N:
        raise DomainError(f"need 1 <= M <= N, got M={M}, N={N}")
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    if M == N:
        return f_coeff(m, N, K, z2), 0.0
    if n_cutoff is None:
        n_cutoff = _tail_cutoff(m, K, z2, SERIES_TAIL)
    terms = []
    for n in range(m, n_cutoff + 1):
        terms.append(math.exp(ln_f_coeff(n, N, K, z2) + ln_binomial(n - m + N - M - 1, n - m)))
    tail = max(1.0 - photon_mass(n_cutoff, K, z2), 0.0)
    return math.fsum(terms), tail


def avg_state_reduced_M(M: int, N: int, K: int, z2: float, m: int,
                        n_cutoff: int | None = None) -> float:
    return avg_state_reduced_M_with_tail(M, N, K, z2, m, n_cutoff)[0]


@dataclass(frozen=True)
class PlonSpectrum:
    N: int
    K: int
    z2: float
    cutoff: int
    coeffs: tuple[tuple[int, float, LogReal], ...]

    @property
    def mass(self) -> float:
        return math.fsum(f * float(deg) for _, f, deg in self.coeffs)


def plon_spectrum(N: int, K: int, z2: float, cutoff: int) -> PlonSpectrum:
    """f(n) together with the sector degeneracies C(n+N-1, n), n <= cutoff."""
    _check(N, K, z2)
    coeffs = tuple((n, f_coeff(n, N, K, z2), log_binomial(n + N - 1, n))
                   for n in range(cutoff + 1))
    return PlonSpectrum(N, K, z2, cutoff, coeffs)


def _sector_fidelity(n: int, N: int, half_ln_f: float, half_ln_p: tuple) -> float:
    """Sum over partitions of n with at most N parts of
    d(Q) * sqrt(f(n) p(0)^m0 prod p(Q_i)^m_i)."""
    lg = [math.lgamma(k + 1) for k in range(N + 1)]
    head = lg[N] + half_ln_f
    h0 = half_ln_p[0]
    prefix = [0.0] * (n + 2)

    def terms():
        for vals, mults, count, dirty in partition_walk(n, N):
            acc = prefix[dirty]
            for j in range(dirty, len(vals)):
                k = mults[j]
                acc += k * half_ln_p[vals[j]] - lg[k]
                prefix[j + 1] = acc
            m0 = N - count
            yield math.exp(head + m0 * h0 - lg[m0] + acc)

    return math.fsum(terms())


def fidelity_by_sector(N: int, z2: float, target_mass: float = DEFAULT_MASS,
                       cutoff: int | None = None, workers: int = 1) -> list[float]:
    """Per-photon-number contributions to the ansatz fidelity (K = 1)."""
    _check(N, 1, z2)
    if cutoff is None:
        cutoff = cutoff_for_mass(z2, 1, N, target_mass)
    half_ln_p = tuple(0.5 * math.log(_p_single_k1(i, N, z2)) for i in range(cutoff + 1))
    jobs = [(n, N, 0.5 * ln_f_coeff(n, N, 1, z2), half_ln_p) for n in range(cutoff + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves submission order, so the merge is deterministic
            return list(pool.map(_sector_fidelity, *zip(*jobs)))
    return [_sector_fidelity(*job) for job in jobs]


def fidelity_ansatz(N: int, z2: float, target_mass: float = DEFAULT_MASS,
                    cutoff: int | None = None, workers: int = 1) -> float:
    """Fidelity between the averaged K = 1 state on A and the N-fold product
    of its single-mode marginal, truncated at a global photon cutoff."""
    return math.fsum(fidelity_by_sector(N, z2, target_mass, cutoff, workers))
