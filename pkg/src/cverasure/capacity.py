"""Closed-form erasure-channel capacities, DV and energy-constrained CV."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .entropy import h_therm
from .numerics import DomainError


@dataclass(frozen=True)
class ChannelParams:
    p: float

    def __post_init__(self):
        _check_p(self.p)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"erasure probability must lie in [0, 1], got {p}")


def q_standard(p: float, nbar: float) -> float:
    """Quantum capacity under a mean photon-number constraint."""
    _check_p(p)
    return max((1.0 - 2.0 * p) * h_therm(nbar), 0.0)


def q_ea(p: float, nbar: float) -> float:
    """Entanglement-assisted quantum capacity."""
    _check_p(p)
    return (1.0 - p) * h_therm(nbar)


def c_ea_classical(p: float, nbar: float) -> float:
    """Entanglement-assisted classical capacity, twice :func:`q_ea`."""
    return 2.0 * q_ea(p, nbar)


def _check_d(d: int) -> None:
    if int(d) != d or d < 2:
        raise DomainError(f"qudit dimension must be an integer >= 2, got {d}")


def q_dv(p: float, d: int) -> float:
    _check_p(p)
    _check_d(d)
    return max((1.0 - 2.0 * p) * math.log2(d), 0.0)


def q_dv_ea(p: float, d: int) -> float:
    _check_p(p)
    _check_d(d)
    return (1.0 - p) * math.log2(d)


def shannon_entropy(spectrum: Sequence[float]) -> float:
    return -math.fsum(x * math.log2(x) for x in spectrum if x > 0)


def coherent_info_erasure_diag(spectrum: Sequence[float], p: float) -> float:
    """Coherent information of a number-diagonal input through the erasure channel.

    Can be negative for p > 1/2; no clamp is applied.
    """
    _check_p(p)
    if any(x < 0 for x in spectrum):
        raise DomainError("spectrum has negative entries")
    if abs(math.fsum(spectrum) - 1.0) > 1e-10:
        raise DomainError(f"spectrum sums to {math.fsum(spectrum)}, not 1")
    return (1.0 - 2.0 * p) * shannon_entropy(spectrum)
