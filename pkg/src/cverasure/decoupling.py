"""Decoupling exponents, rate gaps and threshold solvers for random codes.

Convention: ``xi`` is the per-mode exponent of the squared distance, so the
expected trace distance to the decoupled state is ``poly(N) * 2**(-N xi / 2)``
and decoding is certified when ``xi > 0``.  This fixes the relation between
the exponents and the gap constants: in the high-energy limit

    xi_standard ~ (Q_standard - q H) - c_standard
    xi_ea       ~ 2 (Q_ea - q H) - c_ea

so the standard rate sits ``c_standard`` below capacity and the assisted rate
``c_ea / 2`` below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

from .entropy import h_therm, scaled_h2, _xlog2x
from .numerics import LN2, DomainError
from .typical import (SectorWindow, alpha_bound, alpha_exact, dim_reduced,
                      dim_typical, overlap_delta_reduced, purity_beta, r_opt,
                      _r_opt)

Assisted = Literal["standard", "ea"]

BISECT_TOL = 1e-8
BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class CodeParams:
    nbar: float
    p: float
    q: float
    assisted: Assisted = "standard"

    def __post_init__(self):
        if self.nbar <= 0:
            raise DomainError(f"nbar must be > 0, got {self.nbar}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {self.q}")
        _check_assisted(self.assisted)


@dataclass(frozen=True)
class BoundReport:
    """Finite-N decoupling bound; ``bound = 2**(N * log2_bound_per_N)``."""

    N: int
    log2_bound_per_N: float
    xi: float
    components: dict = field(default_factory=dict)

    @property
    def log2_bound(self) -> float:
        return self.N * self.log2_bound_per_N


def _check_assisted(assisted: str) -> None:
    if assisted not in ("standard", "ea"):
        raise DomainError(f"assisted must be 'standard' or 'ea', got {assisted!r}")


def _check_xi_args(nbar: float, p: float, q: float) -> None:
    if nbar <= 0:
        raise DomainError(f"nbar must be > 0, got {nbar}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")


def xi_standard(nbar: float, p: float, q: float) -> float:
    """Decoupling exponent of the unassisted random code."""
    _check_xi_args(nbar, p, q)
    r = _r_opt(1.0 - p, nbar)
    value = 2.0 * h_therm(nbar) - scaled_h2(nbar, p) - scaled_h2(nbar, q)
    value += nbar * math.log2(r * r)
    if p < 1.0:
        value += (1.0 - p) * math.log2(1.0 - r * r)
    if p > 0:
        value += 2.0 * p * math.log2(1.0 - r)
    return value


def xi_ea(nbar: float, p: float, q: float) -> float:
    """Decoupling exponent of the entanglement-assisted random code."""
    return xi_standard(nbar, p, q) + (1.0 - q) * math.log2(2.0 * nbar + 1.0)


def xi(nbar: float, p: float, q: float, assisted: Assisted = "standard") -> float:
    _check_assisted(assisted)
    return xi_ea(nbar, p, q) if assisted == "ea" else xi_standard(nbar, p, q)


def c_standard(p: float, q: float) -> float:
    """Energy-independent gap of the unassisted code."""
    if not 0.0 <= p <= 1.0 or not 0.0 <= q <= 1.0:
        raise DomainError(f"need p, q in [0, 1], got ({p}, {q})")
    return 2.0 * p - _xlog2x(p) - _xlog2x(1.0 + p) - _xlog2x(q)


def c_ea(p: float, q: float) -> float:
    """Energy-independent gap of the assisted code; exceeds c_standard."""
    return c_standard(p, q) - (1.0 - q) * (1.0 - 1.0 / LN2)


def c_gap(p: float, q: float, assisted: Assisted = "standard") -> float:
    _check_assisted(assisted)
    return c_ea(p, q) if assisted == "ea" else c_standard(p, q)


def xi_high_energy(nbar: float, p: float, q: float, assisted: Assisted = "standard") -> float:
    """Leading large-nbar form of :func:`xi`."""
    _check_assisted(assisted)
    H = h_therm(nbar)
    if assisted == "ea":
        return 2.0 * ((1.0 - p) - q) * H - c_ea(p, q)
    return ((1.0 - 2.0 * p) - q) * H - c_standard(p, q)


def _bisect_last_positive(f, lo: float, hi: float, tol: float = BISECT_TOL) -> float:
    """Largest t in [lo, hi] with f(t) > 0 for f positive at lo, non-positive at hi."""
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= tol * 1e-2:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def capacity(p: float, nbar: float, assisted: Assisted = "standard") -> float:
    from .capacity import q_ea, q_standard
    _check_assisted(assisted)
    return q_ea(p, nbar) if assisted == "ea" else q_standard(p, nbar)


class RateResult(NamedTuple):
    q_optm: float
    rate: float


def max_rate(nbar: float, p: float, assisted: Assisted = "standard",
             tol: float = BISECT_TOL) -> RateResult:
    """Largest rate fraction q with a positive decoupling exponent.

    Uses that xi decreases strictly in q.  Returns (0, 0) when no positive
    rate survives.
    """
    _check_assisted(assisted)
    _check_xi_args(nbar, p, 0.0)
    f = lambda q: xi(nbar, p, q, assisted)
    if f(0.0) <= 0:
        return RateResult(0.0, 0.0)
    if f(1.0) > 0:
        q = 1.0
    else:
        q = _bisect_last_positive(f, 0.0, 1.0, tol)
    return RateResult(q, q * h_therm(nbar))


def p_star(nbar: float, assisted: Assisted = "standard", tol: float = BISECT_TOL) -> float:
    """Critical erasure probability: where the q -> 0 exponent reaches zero."""
    _check_assisted(assisted)
    if nbar <= 0:
        raise DomainError(f"nbar must be > 0, got {nbar}")
    f = lambda p: xi(nbar, p, 0.0, assisted)
    if f(1.0) > 0:
        return 1.0
    return _bisect_last_positive(f, 0.0, 1.0, tol)


def erased_modes(N: int, p: float) -> int:
    """round(p N) with ties rounded up."""
    return math.floor(p * N + 0.5)


def finite_n_bound(N: int, K: int, w: SectorWindow, p: float,
                   assisted: Assisted = "standard", zeta: float | None = None,
                   alpha_mode: Literal["exact", "bound"] = "exact") -> BoundReport:
    """Exact finite-N upper bound on the expected distance to decoupling.

    All components are reported as base-2 logs.  ``zeta`` defaults to its
    trivial bound 1 in the standard case.
    """
    _check_assisted(assisted)
    if w.N != N:
        raise DomainError(f"window is for N={w.N}, not N={N}")
    if not 1 <= K < N:
        raise DomainError(f"need 1 <= K < N, got K={K}, N={N}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    M = erased_modes(N, p)
    z2 = w.z2
    log_dA = dim_typical(w).log2_mag
    log_dR = dim_reduced(K, w.n_plus).log2_mag
    log_dE = dim_reduced(M, w.n_plus).log2_mag
    X = N - M
    if X == N:
        log_alpha = log_dA
    elif X == 0:
        log_alpha = 2.0 * log_dA
    elif alpha_mode == "exact":
        log_alpha = alpha_exact(X, w).log2_mag
    elif alpha_mode == "bound":
        x = X / N
        m = w.n_plus / N
        r = r_opt(x, m)
        log_alpha = alpha_bound(X, N, m, r, r).log2_mag
    else:
        raise DomainError(f"alpha_mode must be 'exact' or 'bound', got {alpha_mode!r}")
    log_delta = math.log2(overlap_delta_reduced(K, w.n_plus, z2))
    if assisted == "ea":
        tail_name = "beta_rest"
        log_tail = math.log2(purity_beta(N - K, w.n_plus, z2))
    else:
        tail_name = "zeta"
        zeta = 1.0 if zeta is None else zeta
        if not 0.0 < zeta <= 1.0:
            raise DomainError(f"zeta must lie in (0, 1], got {zeta}")
        log_tail = math.log2(zeta)
    components = {
        "M": M,
        "log2_d_R": log_dR,
        "log2_d_E": log_dE,
        "log2_alpha_B": log_alpha,
        "log2_delta_K": log_delta,
        f"log2_{tail_name}": log_tail,
        "log2_d_A": log_dA,
    }
    log_bound = 0.5 * (log_dR + log_dE + log_alpha + 2.0 * log_delta + log_tail - 2.0 * log_dA)
    per_N = log_bound / N
    return BoundReport(N, per_N, -2.0 * per_N, components)


class ThresholdResult(NamedTuple):
    q_tilde: float
    q_tilde_high_energy: float


def hp_threshold(nbar: float, q: float, assisted: Assisted = "standard",
                 tol: float = BISECT_TOL) -> ThresholdResult:
    """Fraction of output modes needed before recovery is certified.

    Solves xi(nbar, 1 - q_tilde, q) = 0 for q_tilde in (q, 1].  Also solves
    the same equation with the high-energy form of xi.  Returns 1 when no
    root exists.
    """
    _check_assisted(assisted)
    if nbar <= 0 or not 0.0 < q < 1.0:
        raise DomainError(f"need nbar > 0 and 0 < q < 1, got ({nbar}, {q})")

    def solve(g) -> float:
        # g(q_tilde) increases with q_tilde; find the smallest positive point
        if g(1.0) <= 0:
            return 1.0
        if g(q) > 0:
            return q
        lo, hi = q, 1.0
        for _ in range(BISECT_MAX_ITER):
            if hi - lo <= tol * 1e-2:
                break
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                hi = mid
            else:
                lo = mid
        return hi

    exact = solve(lambda qt: xi(nbar, 1.0 - qt, q, assisted))
    approx = solve(lambda qt: xi_high_energy(nbar, 1.0 - qt, q, assisted))
    return ThresholdResult(exact, approx)


class ConstantKExponent(NamedTuple):
    exponent: float
    half: float


def constant_k_exponent(nbar: float) -> ConstantKExponent:
    """Growth exponent of the bound when K stays fixed as N grows.

    ``half`` is the exponent of the distance itself (square root taken).
    """
    if nbar <= 0:
        raise DomainError(f"nbar must be > 0, got {nbar}")
    e = 2.0 * (nbar - 1.0) * h_therm(nbar) + 1.0 / LN2 + 1.0
    return ConstantKExponent(e, 0.5 * e)
