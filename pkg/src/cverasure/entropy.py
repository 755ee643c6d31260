"""Entropy functions and squeezing-parameter conversions (all in bits)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import DomainError


def _xlog2x(x: float) -> float:
    return 0.0 if x == 0 else x * math.log2(x)


def h2(x: float) -> float:
    """Binary entropy, with h2(0) = h2(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"h2 needs 0 <= x <= 1, got {x}")
    return -_xlog2x(x) - _xlog2x(1.0 - x)


def h_therm(nbar: float) -> float:
    """Entropy of a single-mode thermal state with mean photon number nbar."""
    if nbar < 0:
        raise DomainError(f"h_therm needs nbar >= 0, got {nbar}")
    return _xlog2x(nbar + 1.0) - _xlog2x(nbar)


def scaled_h2(nbar: float, a: float) -> float:
    """(nbar + a) * h2(nbar / (nbar + a)), extended continuously to a = 0.

    This combination appears in every typical-subspace dimension exponent.
    """
    if nbar < 0 or a < 0:
        raise DomainError(f"scaled_h2 needs nbar, a >= 0, got ({nbar}, {a})")
    return _xlog2x(nbar + a) - _xlog2x(nbar) - _xlog2x(a)


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing |z|^2 together with the mean photon number it implies."""

    z2: float
    nbar: float

    def __post_init__(self):
        if not 0.0 <= self.z2 < 1.0:
            raise DomainError(f"z2 must lie in [0, 1), got {self.z2}")
        if self.nbar < 0:
            raise DomainError(f"nbar must be >= 0, got {self.nbar}")

    @classmethod
    def from_z2(cls, z2: float) -> "SqueezeParams":
        if not 0.0 <= z2 < 1.0:
            raise DomainError(f"z2 must lie in [0, 1), got {z2}")
        return cls(z2, z2 / (1.0 - z2))

    @classmethod
    def from_nbar(cls, nbar: float) -> "SqueezeParams":
        if nbar < 0:
            raise DomainError(f"nbar must be >= 0, got {nbar}")
        return cls(nbar / (nbar + 1.0), float(nbar))


def sample_entropy(x_tot: int, N: int, z2: float) -> float:
    """Per-mode surprisal of a photon string with ``x_tot`` photons in ``N`` modes
    drawn from the N-fold thermal state."""
    if not 0.0 < z2 < 1.0:
        raise DomainError(f"sample_entropy needs 0 < z2 < 1, got {z2}")
    if N < 1 or x_tot < 0:
        raise DomainError(f"need N >= 1 and x_tot >= 0, got ({x_tot}, {N})")
    return -math.log2(1.0 - z2) - (x_tot / N) * math.log2(z2)
