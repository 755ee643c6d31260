"""Typical-subspace combinatorics for N-fold thermal states.

Sector windows, subspace dimensions, overlaps and purities, the marginal
purity alpha_X with its contour bound, and submultiplicativity exponents.
Exact Python-integer arithmetic is used wherever it is affordable; the
log-domain fallbacks factor out the larger term before subtracting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .entropy import SqueezeParams, h_therm, scaled_h2, _xlog2x
from .numerics import (LN2, DomainError, LogReal, ln_binomial, log2_sum)

# Dimension differences are formed exactly while top + N stays below this.
EXACT_DIM_LIMIT = 10_000
# alpha_X is summed exactly while n_plus + N stays below this.
EXACT_ALPHA_LIMIT = 4_000

_SNAP = 1e-9


def _snap(t: float) -> float:
    r = round(t)
    if abs(t - r) <= _SNAP * max(1.0, abs(t)):
        return float(r)
    return t


@dataclass(frozen=True)
class SectorWindow:
    """Photon-number window [n_minus, n_plus] on N modes."""

    N: int
    delta: float
    n_minus: int
    n_plus: int
    m_minus: float
    m_plus: float
    squeeze: SqueezeParams | None = None

    @property
    def z2(self) -> float:
        if self.squeeze is None:
            raise DomainError("this window carries no squeezing parameter")
        return self.squeeze.z2


@dataclass(frozen=True)
class AlphaBoundParams:
    x: float
    m_plus: float
    r: float
    s: float

    def __post_init__(self):
        if not 0.0 < self.x <= 1.0:
            raise DomainError(f"x must lie in (0, 1], got {self.x}")
        for name in ("r", "s"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")


def sector_window(N: int, delta: float, squeeze: SqueezeParams) -> SectorWindow:
    """Window of total photon numbers whose sample entropy is within delta
    of the thermal entropy.

    Products N * (nbar +- kappa) within 1e-9 of an integer are snapped to it
    before rounding, so exact inputs are not lost to floating-point noise.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if not 0.0 < squeeze.z2 < 1.0:
        raise DomainError(f"window needs 0 < z2 < 1, got {squeeze.z2}")
    kappa = delta / abs(math.log2(squeeze.z2))
    m_plus = squeeze.nbar + kappa
    m_minus = squeeze.nbar - kappa
    n_plus = math.floor(_snap(N * m_plus))
    n_minus = max(math.ceil(_snap(N * m_minus)), 0)
    if n_minus > n_plus:
        raise DomainError(
            f"infeasible window: ceil={n_minus} > floor={n_plus} "
            f"(N={N}, nbar={squeeze.nbar}, delta={delta})")
    return SectorWindow(N, delta, n_minus, n_plus, m_minus, m_plus, squeeze)


def window_from_counts(N: int, n_minus: int, n_plus: int,
                       squeeze: SqueezeParams | None = None) -> SectorWindow:
    """Window given directly by its integer photon bounds."""
    if N < 1 or n_minus < 0 or n_minus > n_plus:
        raise DomainError(f"invalid window N={N}, [{n_minus}, {n_plus}]")
    return SectorWindow(N, math.nan, n_minus, n_plus, n_minus / N, n_plus / N, squeeze)


def _log2_comb(a: int, b: int) -> float:
    return ln_binomial(a, b) / LN2


def _log2_diff(big: float, small: float) -> float:
    """log2(2**big - 2**small) for big > small."""
    return big + math.log1p(-(2.0 ** (small - big))) / LN2


def dim_typical_exact(w: SectorWindow) -> int:
    low = math.comb(w.n_minus - 1 + w.N, w.n_minus - 1) if w.n_minus > 0 else 0
    return math.comb(w.n_plus + w.N, w.n_plus) - low


def dim_typical(w: SectorWindow) -> LogReal:
    """Number of N-mode Fock states with total photon number in the window."""
    if w.n_plus + w.N <= EXACT_DIM_LIMIT:
        return LogReal.from_int(dim_typical_exact(w))
    top = _log2_comb(w.n_plus + w.N, w.n_plus)
    if w.n_minus == 0:
        return LogReal(1, top)
    return LogReal(1, _log2_diff(top, _log2_comb(w.n_minus - 1 + w.N, w.n_minus - 1)))


def dim_reduced(M: int, n_plus: int) -> LogReal:
    """Number of M-mode Fock states with at most n_plus photons."""
    if M < 0 or n_plus < 0:
        raise DomainError(f"need M, n_plus >= 0, got ({M}, {n_plus})")
    if n_plus + M <= EXACT_DIM_LIMIT:
        return LogReal.from_int(math.comb(n_plus + M, n_plus))
    return LogReal(1, _log2_comb(n_plus + M, n_plus))


def _thermal_log2_terms(modes: int, z2: float, lo: int, hi: int, power: int = 1):
    """log2 of (1-z2)^(power*modes) z2^(power*n) C(n+modes-1, n) for n in [lo, hi]."""
    base = power * modes * math.log2(1.0 - z2)
    lz = power * math.log2(z2) if z2 > 0 else -math.inf
    out = []
    for n in range(lo, hi + 1):
        if n and lz == -math.inf:
            break
        out.append(base + (n * lz if n else 0.0) + _log2_comb(n + modes - 1, n))
    return out


def _thermal_window_sum(modes: int, z2: float, lo: int, hi: int, power: int = 1) -> float:
    if modes == 0:
        return 1.0 if lo == 0 else 0.0
    terms = _thermal_log2_terms(modes, z2, lo, hi, power)
    return math.fsum(2.0 ** t for t in terms)


def overlap_delta_full(w: SectorWindow) -> float:
    """tr[Pi_typical rho_z^{(x)N}]."""
    return _thermal_window_sum(w.N, w.z2, w.n_minus, w.n_plus)


def overlap_delta_reduced(K: int, n_plus: int, z2: float) -> float:
    """tr[Pi_K rho_z^{(x)K}] where Pi_K keeps at most n_plus photons on K modes."""
    if K < 0 or n_plus < 0:
        raise DomainError(f"need K, n_plus >= 0, got ({K}, {n_plus})")
    return _thermal_window_sum(K, z2, 0, n_plus)


def purity_beta(K: int, n_plus: int, z2: float, n_minus: int | None = None) -> float:
    """Purity of rho_z^{(x)K} restricted to at most n_plus photons.

    With ``n_minus`` the sum runs over the full window [n_minus, n_plus].
    """
    if K < 0 or n_plus < 0:
        raise DomainError(f"need K, n_plus >= 0, got ({K}, {n_plus})")
    lo = 0 if n_minus is None else n_minus
    return _thermal_window_sum(K, z2, lo, n_plus, power=2)


def _check_X(X: int, w: SectorWindow) -> None:
    if not 1 <= X < w.N:
        raise DomainError(f"alpha_X needs 1 <= X < N, got X={X}, N={w.N}")


def alpha_exact_int(X: int, w: SectorWindow) -> int:
    """Exact d_A^2 tr[rho_X^2] for the maximally mixed typical state."""
    _check_X(X, w)
    N, lo, hi = w.N, w.n_minus, w.n_plus
    Y = N - X
    total = 0
    for m in range(hi + 1):
        upper = math.comb(hi - m + Y, hi - m)
        k = lo - m - 1
        lower = math.comb(k + Y, k) if k >= 0 else 0
        total += math.comb(m + X - 1, m) * (upper - lower) ** 2
    return total


def alpha_exact(X: int, w: SectorWindow) -> LogReal:
    """alpha_X = d_A^2 tr[rho_X^2], with rho_X the X-mode marginal of the
    maximally mixed state on the typical subspace."""
    _check_X(X, w)
    if w.n_plus + w.N <= EXACT_ALPHA_LIMIT:
        return LogReal.from_int(alpha_exact_int(X, w))
    N, lo, hi = w.N, w.n_minus, w.n_plus
    Y = N - X
    terms = []
    for m in range(hi + 1):
        upper = _log2_comb(hi - m + Y, hi - m)
        k = lo - m - 1
        bracket = _log2_diff(upper, _log2_comb(k + Y, k)) if k >= 0 else upper
        terms.append(_log2_comb(m + X - 1, m) + 2.0 * bracket)
    return LogReal(1, log2_sum(terms))


def r_opt(x: float, m_plus: float) -> float:
    """Radius maximising r^(2m) (1+r)^x (1-r)^(2-x) on (0, 1)."""
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must lie in (0, 1], got {x}")
    if m_plus <= 0:
        raise DomainError(f"m_plus must be > 0, got {m_plus}")
    return _r_opt(x, m_plus)


def _r_opt(x: float, m_plus: float) -> float:
    # also meaningful at x = 0, which the decoupling exponent reaches at p = 1
    t = (1.0 - x) / (2.0 * (m_plus + 1.0))
    return math.sqrt(m_plus / (m_plus + 1.0) + t * t) - t


def alpha_bound(X: int, N: int, m_plus: float, r: float, s: float) -> LogReal:
    """Contour bound on alpha_X, valid for any r, s in (0, 1).

    ``m_plus * N`` plays the role of the upper photon bound.
    """
    if not (0.0 < r < 1.0 and 0.0 < s < 1.0):
        raise DomainError(f"r and s must lie in (0, 1), got ({r}, {s})")
    if not 0 < X <= N:
        raise DomainError(f"need 0 < X <= N, got X={X}, N={N}")
    rs = r * s
    # log2(r) + log2(s) survives r * s underflowing
    log2_value = (-m_plus * N * (math.log2(r) + math.log2(s))
                  - X * math.log2(1.0 - rs)
                  - (N - X) * (math.log2(1.0 - r) + math.log2(1.0 - s))
                  - math.log2((1.0 - rs) * (1.0 - r) * (1.0 - s)))
    return LogReal(1, log2_value)


def alpha_bound_exponent(x: float, m_plus: float) -> float:
    """Per-mode growth rate of the contour bound at r = s = r_opt."""
    r = r_opt(x, m_plus)
    value = m_plus * math.log2(r * r) + x * math.log2(1.0 - r * r)
    if x < 1.0:
        value += 2.0 * (1.0 - x) * math.log2(1.0 - r)
    return -value


def alpha_bound_high_energy_exponent(x: float, m_plus: float) -> float:
    """Large-m_plus form of :func:`alpha_bound_exponent`."""
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must lie in (0, 1], got {x}")
    return ((2.0 - x) * h_therm(m_plus) + 2.0 * (1.0 - x)
            - (2.0 - x) * math.log2(2.0 - x))


def dim_reduced_exponent(x: float, m_plus: float) -> float:
    """Per-mode exponent of C(m_plus N + x N, m_plus N) as N grows."""
    return scaled_h2(m_plus, x)


def submult_exponent(x: float, m_plus: float) -> float:
    """Per-mode exponent of d_X d_Y / d_A with y = 1 - x.

    Tends to h2(x) as m_plus grows.
    """
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    if m_plus < 0:
        raise DomainError(f"m_plus must be >= 0, got {m_plus}")
    y = 1.0 - x
    m = m_plus
    return (_xlog2x(m + x) + _xlog2x(m + y) - _xlog2x(m + 1.0) - _xlog2x(m)
            - _xlog2x(x) - _xlog2x(y))
