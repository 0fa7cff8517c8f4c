import math

import numpy as np
import pytest

from field.shear import FieldSpec, FieldStats, sample_field
from strain.quench import (
    BUMP_MEAN,
    UndefinedThresholdError,
    build_quench_witness,
    quench_check,
    quench_threshold,
    strain_intervals,
)

# golden field at (m, n) = (0.6, 0.8): τ = 0.6π, α = 1/3
book_c_bar = 331.04
book_interval = (1 / 12, 5 / 12)
book_mean = 2.4  # n/α


@pytest.fixture(scope="module")
def golden():
    return sample_field(FieldSpec.golden())


def test_threshold_golden():
    stats = FieldStats(0.6 * math.pi, 1 / 3, 1.0)
    assert quench_threshold(stats, 0.6, 0.8) == pytest.approx(book_c_bar, rel=1e-4)
    assert quench_threshold(stats, 0.6, -0.8) == quench_threshold(stats, 0.6, 0.8)


@pytest.mark.parametrize("tau, alpha, m", [(0.0, 0.3, 0.6), (1.0, 1.0, 0.6), (1.0, 0.0, 0.6), (1.0, 0.3, 0.0)])
def test_threshold_undefined(tau, alpha, m):
    with pytest.raises(UndefinedThresholdError):
        quench_threshold(FieldStats(tau, alpha, 1.0), m, 0.8)


def test_strain_intervals(golden):
    x_ray = np.linspace(0, 1, 257)
    spans = strain_intervals(lambda x: 0.6 * golden.v_prime(x), x_ray, -0.3 * math.pi)
    assert len(spans) == 1
    assert spans[0] == pytest.approx(book_interval, abs=1e-10)


def test_witness_golden(golden):
    wit = build_quench_witness(golden, 0.6, 0.8, 400.0, 1.0)
    assert len(wit.intervals) == 1
    assert wit.intervals[0] == pytest.approx(book_interval, abs=1e-10)
    assert wit.alpha == pytest.approx(1 / 3, abs=1e-10)
    assert wit.c_bar == pytest.approx(book_c_bar, rel=1e-4)
    assert wit.heights[0] == pytest.approx(book_mean / BUMP_MEAN, abs=1e-8)
    np.testing.assert_allclose(wit.interval_means(), book_mean, atol=1e-8)
    assert wit.bound_ok
    assert wit.passed
    assert wit.max_H <= wit.h_star + 1e-6
    assert wit.drift < 1e-3
    assert "PASS" in repr(wit)


def test_witness_support(golden):
    wit = build_quench_witness(golden, 0.6, 0.8, 400.0, 1.0)
    assert wit.psi(0.0) == 0.0
    assert wit.psi(0.5) == 0.0
    assert wit.psi(0.25) == pytest.approx(wit.heights[0])


def test_witness_below_threshold_warns(golden, caplog):
    wit = build_quench_witness(golden, 0.6, 0.8, 10.0, 1.0)
    assert "below the threshold" in caplog.text
    assert wit.c == 10.0


def test_witness_needs_strain():
    real = sample_field(FieldSpec.zero())
    with pytest.raises(UndefinedThresholdError):
        build_quench_witness(real, 0.6, 0.8, 400.0, 1.0)


def test_quench_check_above_threshold(golden):
    verdict = quench_check(golden, 0.6, 0.8, 1.1 * book_c_bar, 1.0)
    assert verdict.passed
    assert verdict.status == "PASS"
    assert verdict.h == pytest.approx(0.9, abs=1e-3)


def test_quench_check_below_threshold(golden, caplog):
    verdict = quench_check(golden, 0.6, 0.8, 0.2, 1.0)
    assert "not covered by the bound" in caplog.text
    assert not verdict.passed
    assert verdict.h > verdict.h_star
