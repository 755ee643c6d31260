import math

import numpy as np
import pytest

from cverasure.entropy import SqueezeParams, h2, h_therm, sample_entropy, scaled_h2
from cverasure.numerics import DomainError


def test_h2_values():
    assert h2(0.5) == 1.0
    assert h2(0.0) == 0.0 and h2(1.0) == 0.0
    assert h2(0.25) == pytest.approx(0.8112781244591328, rel=1e-14)
    with pytest.raises(DomainError):
        h2(1.5)


def test_h_therm_anchors():
    assert h_therm(1.0) == 2.0
    assert h_therm(0.0) == 0.0
    assert 4.35 <= h_therm(7.5) <= 4.45
    with pytest.raises(DomainError):
        h_therm(-0.1)


def test_h_therm_binary_entropy_relation():
    for n in np.geomspace(0.01, 100, 40):
        assert h_therm(n) == pytest.approx((n + 1) * h2(n / (n + 1)), abs=1e-10)


def test_h_therm_increasing_concave():
    grid = np.linspace(0.01, 100, 2000)
    vals = np.array([h_therm(n) for n in grid])
    assert np.all(np.diff(vals) > 0)
    assert np.all(np.diff(vals, 2) < 0)


def test_scaled_h2_limit():
    assert scaled_h2(3.0, 0.0) == 0.0
    assert scaled_h2(3.0, 1.0) == pytest.approx(h_therm(3.0), abs=1e-14)


def test_squeeze_round_trip():
    for z2 in (0.0, 0.1, 0.5, 0.9, 0.999):
        s = SqueezeParams.from_z2(z2)
        assert SqueezeParams.from_nbar(s.nbar).z2 == pytest.approx(z2, abs=1e-12)
    for nbar in (0.0, 0.5, 1.0, 9.0, 1000.0):
        s = SqueezeParams.from_nbar(nbar)
        assert s.nbar == nbar
        assert s.z2 / (1 - s.z2) == pytest.approx(nbar, rel=1e-12)
    with pytest.raises(DomainError):
        SqueezeParams.from_z2(1.0)


def test_sample_entropy_center_and_vacuum():
    assert sample_entropy(20, 10, 2 / 3) == pytest.approx(h_therm(2.0), abs=1e-12)
    assert sample_entropy(0, 7, 0.3) == pytest.approx(-math.log2(0.7), abs=1e-15)


def test_sample_entropy_probability_oracle():
    N, z2, x = 10, 0.5, 12
    prob = (1 - z2) ** N * z2 ** x
    assert sample_entropy(x, N, z2) == pytest.approx(-math.log2(prob) / N, abs=1e-14)


def test_sample_entropy_difference_identity():
    for z2 in (0.2, 0.5, 0.8):
        nbar = z2 / (1 - z2)
        for x, N in ((3, 10), (40, 17), (0, 5)):
            diff = sample_entropy(x, N, z2) - h_therm(nbar)
            assert diff == pytest.approx((nbar - x / N) * math.log2(z2), abs=1e-12)


def test_sample_entropy_domain():
    with pytest.raises(DomainError):
        sample_entropy(1, 1, 0.0)
