"""Scalar arithmetic, special functions and combinatorial enumeration.

Everything here is a pure function over value types.  Large binomial
products are carried as :class:`LogReal` (sign plus base-2 log magnitude);
Python integers serve as the exact cross-check layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Sequence

LN2 = math.log(2.0)

# Binomials with a top argument up to this value are evaluated exactly and
# then rounded once to a base-2 log.  Above it the log-gamma path is used.
EXACT_BINOMIAL_LIMIT = 5000

SERIES_TOL = 1e-15
SERIES_MAX_TERMS = 10**6


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(ArithmeticError):
    """A series failed to converge within its term budget."""

    def __init__(self, message: str, partial_sum: float, terms: int):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


@total_ordering
@dataclass(frozen=True)
class LogReal:
    """Real number stored as ``sign * 2**log2_mag``.

    ``sign == 0`` is exact zero; ``log2_mag`` is then ``-inf`` and ignored.
    """

    sign: int
    log2_mag: float = -math.inf

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or +1, got {self.sign}")
        if self.sign == 0:
            object.__setattr__(self, "log2_mag", -math.inf)
        elif math.isnan(self.log2_mag):
            raise DomainError("log2_mag is NaN")

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(0)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(1, 0.0)

    @classmethod
    def from_log2(cls, log2_mag: float, sign: int = 1) -> "LogReal":
        if log2_mag == -math.inf:
            return cls(0)
        return cls(sign, float(log2_mag))

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x == 0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log2(abs(x)))

    @classmethod
    def from_int(cls, n: int) -> "LogReal":
        # math.log2 is exact to an ulp for arbitrarily large ints
        if n == 0:
            return cls(0)
        return cls(1 if n > 0 else -1, math.log2(abs(n)))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log2_mag > 1024:
            return self.sign * math.inf
        if self.log2_mag < -1080:
            return 0.0 * self.sign
        return self.sign * 2.0 ** self.log2_mag

    def __neg__(self) -> "LogReal":
        return LogReal(-self.sign, self.log2_mag)

    def __abs__(self) -> "LogReal":
        return LogReal(abs(self.sign), self.log2_mag)

    def _coerce(self, other) -> "LogReal":
        if isinstance(other, LogReal):
            return other
        if isinstance(other, int):
            return LogReal.from_int(other)
        if isinstance(other, float):
            return LogReal.from_float(other)
        return NotImplemented

    def __mul__(self, other) -> "LogReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.sign == 0 or other.sign == 0:
            return LogReal(0)
        return LogReal(self.sign * other.sign, self.log2_mag + other.log2_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.sign == 0:
            raise ZeroDivisionError("LogReal division by zero")
        if self.sign == 0:
            return LogReal(0)
        return LogReal(self.sign * other.sign, self.log2_mag - other.log2_mag)

    def __pow__(self, exponent: float) -> "LogReal":
        if self.sign == 0:
            if exponent > 0:
                return LogReal(0)
            raise ZeroDivisionError("zero to a non-positive power")
        if self.sign < 0 and not float(exponent).is_integer():
            raise DomainError("non-integer power of a negative LogReal")
        sign = 1 if self.sign > 0 or int(exponent) % 2 == 0 else -1
        return LogReal(sign, self.log2_mag * exponent)

    def __add__(self, other) -> "LogReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log2_mag >= other.log2_mag else (other, self)
        gap = small.log2_mag - big.log2_mag  # <= 0
        if big.sign == small.sign:
            return LogReal(big.sign, big.log2_mag + math.log1p(2.0 ** gap) / LN2)
        if gap == 0.0:
            return LogReal(0)
        return LogReal(big.sign, big.log2_mag + math.log1p(-(2.0 ** gap)) / LN2)

    __radd__ = __add__

    def __sub__(self, other) -> "LogReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "LogReal":
        return (-self) + other

    def _key(self):
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log2_mag)

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self._key() == other._key()

    def __lt__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())


def ln_binomial(a: int, b: int) -> float:
    """Natural log of C(a, b) by log-gamma; no exact path, for hot loops."""
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def binomial_exact(a: int, b: int) -> int:
    """Exact C(a, b) as a Python integer."""
    if a < 0 or b < 0 or b > a:
        raise DomainError(f"binomial needs 0 <= b <= a, got ({a}, {b})")
    return math.comb(a, b)


def log_binomial(a: int, b: int) -> LogReal:
    """C(a, b) as a LogReal.

    Exact below :data:`EXACT_BINOMIAL_LIMIT` (rounded once to the log),
    log-gamma above it.
    """
    if a < 0 or b < 0 or b > a:
        raise DomainError(f"binomial needs 0 <= b <= a, got ({a}, {b})")
    if a <= EXACT_BINOMIAL_LIMIT:
        return LogReal.from_int(math.comb(a, b))
    return LogReal(1, ln_binomial(a, b) / LN2)


def multinomial_log(N: int, multiplicities: Sequence[int]) -> LogReal:
    """N! / prod(m_i!) as a LogReal, via log-gamma."""
    if any(m < 0 for m in multiplicities):
        raise DomainError("multiplicities must be non-negative")
    if sum(multiplicities) != N:
        raise DomainError(f"multiplicities sum to {sum(multiplicities)}, expected {N}")
    ln_value = math.lgamma(N + 1) - math.fsum(math.lgamma(m + 1) for m in multiplicities)
    return LogReal(1, ln_value / LN2)


def gauss_2f1(a: float, b: float, c: float, x: float, *,
              tol: float | None = None, max_terms: int | None = None) -> float:
    """Gauss hypergeometric function by its defining series.

    Only non-negative ``a``, ``b`` and ``0 <= x < 1`` are supported.  The
    sum stops once a term is below ``tol`` relative to the partial sum and
    the terms are decreasing.

    Raises:
        DomainError: parameters out of range.
        ConvergenceError: the term budget ran out; carries the partial sum.
    """
    tol = SERIES_TOL if tol is None else tol
    max_terms = SERIES_MAX_TERMS if max_terms is None else max_terms
    if not 0.0 <= x < 1.0:
        raise DomainError(f"2F1 series needs 0 <= x < 1, got {x}")
    if c <= 0 or a < 0 or b < 0:
        raise DomainError(f"2F1 needs a, b >= 0 and c > 0, got ({a}, {b}, {c})")
    terms = [1.0]
    total = 1.0
    term = 1.0
    for k in range(max_terms):
        new = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        if new == 0.0:
            return math.fsum(terms)
        terms.append(new)
        total += new
        if new < term and new <= tol * total:
            return math.fsum(terms)
        term = new
    partial = math.fsum(terms)
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; {x}) did not converge in {max_terms} terms",
        partial, max_terms)


def compositions(n: int, N: int) -> Iterator[tuple[int, ...]]:
    """All ways to place ``n`` identical photons in ``N`` modes.

    Tuples are yielded in colexicographic order (last entry slowest), so
    ``compositions(3, 2)`` gives (3, 0), (2, 1), (1, 2), (0, 3).
    """
    if n < 0 or N < 1:
        raise DomainError(f"compositions need n >= 0 and N >= 1, got ({n}, {N})")
    if N == 1:
        yield (n,)
        return
    for last in range(n + 1):
        for head in compositions(n - last, N - 1):
            yield head + (last,)


@dataclass(frozen=True)
class PartitionMult:
    """Integer partition in multiplicity form.

    ``parts`` holds ``(value, multiplicity)`` pairs with strictly decreasing
    values, e.g. 4+3+3+1+1+1 is ``((4, 1), (3, 2), (1, 3))``.
    """

    parts: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return sum(v * m for v, m in self.parts)

    @property
    def num_parts(self) -> int:
        return sum(m for _, m in self.parts)

    def expand(self) -> tuple[int, ...]:
        return tuple(v for v, m in self.parts for _ in range(m))


def partition_walk(n: int, max_parts: int) -> Iterator[tuple[list, list, int, int]]:
    """Low-level bounded partition walk in reverse-lexicographic order.

    Yields ``(values, multiplicities, num_parts, dirty)`` where the two lists
    are the live state of the walker (do not mutate, copy if kept) and
    ``dirty`` is the first index whose entry changed since the previous
    yield.  Consumers can cache prefix quantities below ``dirty``.
    """
    if n < 0 or max_parts < 1:
        raise DomainError(f"partitions need n >= 0 and max_parts >= 1, got ({n}, {max_parts})")
    if n == 0:
        yield [], [], 0, 0
        return
    vals = [n]
    mults = [1]
    count = 1
    yield vals, mults, count, 0
    while True:
        rest = 0
        if vals[-1] == 1:
            rest = mults[-1]
            count -= rest
            vals.pop()
            mults.pop()
        while True:
            if not vals:
                return
            v = vals[-1]
            mults[-1] -= 1
            count -= 1
            rest += v
            if mults[-1] == 0:
                vals.pop()
                mults.pop()
            w = v - 1
            q, r = divmod(rest, w)
            need = q + (1 if r else 0)
            # the greedy refill uses the fewest parts; if it does not fit,
            # nothing else with this prefix does either
            if count + need <= max_parts:
                dirty = len(vals) - 1 if vals and vals[-1] == v else len(vals)
                vals.append(w)
                mults.append(q)
                if r:
                    vals.append(r)
                    mults.append(1)
                count += need
                yield vals, mults, count, dirty
                break


def partitions_bounded(n: int, max_parts: int) -> Iterator[PartitionMult]:
    """Partitions of ``n`` with at most ``max_parts`` parts, streamed.

    Order is reverse-lexicographic on the descending parts: (n), (n-1, 1),
    (n-2, 2), (n-2, 1, 1), ...  Memory is O(n).
    """
    for vals, mults, _, _ in partition_walk(n, max_parts):
        yield PartitionMult(tuple(zip(vals, mults)))


def compensated_sum(values: Iterable[float | LogReal]) -> float:
    """Accurately rounded sum of a finite stream of reals or LogReals."""
    return math.fsum(float(v) for v in values)


def log2_sum(log2_terms: Sequence[float]) -> float:
    """log2 of a sum of positive terms given by their base-2 logs."""
    finite = [t for t in log2_terms if t != -math.inf]
    if not finite:
        return -math.inf
    top = max(finite)
    return top + math.log2(math.fsum(2.0 ** (t - top) for t in finite))
