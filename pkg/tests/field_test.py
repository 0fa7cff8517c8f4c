import math

import numpy as np
import pytest

from field.shear import (
    PERIODIC,
    RANDOM_PHASE,
    FieldPair,
    FieldSpec,
    FieldStats,
    InvalidSpecError,
    field_bounds,
    level_fraction,
    sample_field,
    sample_table,
    scan_extrema,
)

# golden periodic field v = 0.5·cos(2πx) with slope factor m = 0.6
book_k_hi = 0.3
book_s_hi = 0.6 * math.pi
book_alpha = 1 / 3  # sin(2πx) > 1/2 on (1/12, 5/12) of each period


@pytest.fixture
def golden():
    return sample_field(FieldSpec.golden())


def test_golden_spec():
    spec = FieldSpec.golden()
    assert spec.model == PERIODIC
    assert spec.amplitudes == (0.5,)
    assert spec.frequencies == (1.0,)


def test_random_default_modes():
    spec = FieldSpec.random_default(3)
    assert spec.model == RANDOM_PHASE
    assert sum(spec.amplitudes) == pytest.approx(1.0)
    assert spec.frequencies[1] == pytest.approx(math.sqrt(2))
    assert spec.seed == 3


def test_sample_is_deterministic():
    x = np.linspace(0, 50, 5001)
    one = sample_field(FieldSpec.random_default(7))
    two = sample_field(FieldSpec.random_default(7))
    np.testing.assert_array_equal(one.phases, two.phases)
    np.testing.assert_array_equal(one.v(x), two.v(x))
    np.testing.assert_array_equal(one.v_prime(x), two.v_prime(x))


def test_seeds_give_different_phases():
    one = sample_field(FieldSpec.random_default(0))
    two = sample_field(FieldSpec.random_default(1))
    assert not np.array_equal(one.phases, two.phases)
    assert np.all((one.phases >= 0) & (one.phases < 2 * np.pi))


def test_realization_is_frozen(golden):
    with pytest.raises(ValueError):
        golden.amps[0] = 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"model": "turbulent"},
        {"model": RANDOM_PHASE, "amplitudes": [], "frequencies": []},
        {"model": RANDOM_PHASE, "amplitudes": [0.5, 0.5], "frequencies": [1.0]},
        {"model": RANDOM_PHASE, "amplitudes": [0.5], "frequencies": [-1.0]},
        {"model": RANDOM_PHASE, "amplitudes": [math.inf], "frequencies": [1.0]},
        {"model": RANDOM_PHASE, "amplitudes": [0.5, 0.5], "frequencies": [1.0, 2.0]},
        {"model": PERIODIC, "amplitudes": [0.5, 0.5], "frequencies": [1.0, 2.0]},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpecError):
        FieldSpec(**kwargs)


def test_spec_dict_keys():
    spec = FieldSpec.random_default(11)
    data = spec.to_dict()
    assert set(data) == {"model", "amplitudes", "frequencies", "seed"}
    assert FieldSpec.from_dict(data) == spec


def test_spec_missing_model():
    with pytest.raises(InvalidSpecError, match="model"):
        FieldSpec.from_dict({"amplitudes": [1.0]})


def test_golden_values(golden):
    assert golden.v(0.0) == pytest.approx(0.5)
    assert golden.v(0.25) == pytest.approx(0.0, abs=1e-15)
    assert golden.v_prime(0.25) == pytest.approx(-math.pi)
    assert golden.period == 1.0
    assert golden.default_window == 2000.0


def test_random_has_no_period():
    real = sample_field(FieldSpec.random_default(0))
    assert real.period is None
    assert real.default_window == pytest.approx(2000.0)


def test_zero_field():
    real = sample_field(FieldSpec.zero())
    x = np.linspace(0, 3, 31)
    np.testing.assert_array_equal(real.v(x), np.zeros_like(x))
    assert real.amp_sum == 0.0
    assert field_bounds(real, 10.0, m=0.6) == (0.0, 0.0, 0.0, 0.0)


def test_golden_bounds(golden):
    k_lo, k_hi, s_lo, s_hi = field_bounds(golden, 10.0, m=0.6)
    assert k_hi == pytest.approx(book_k_hi, abs=1e-10)
    assert k_lo == pytest.approx(-book_k_hi, abs=1e-10)
    assert s_hi == pytest.approx(book_s_hi, abs=1e-9)
    assert s_lo == pytest.approx(-book_s_hi, abs=1e-9)


def test_random_bounds_enclose_samples():
    real = sample_field(FieldSpec.random_default(2))
    k_lo, k_hi, s_lo, s_hi = field_bounds(real, 200.0)
    x = np.linspace(0, 200, 20001)
    assert real.v(x).max() <= k_hi + 1e-12
    assert real.v(x).min() >= k_lo - 1e-12
    assert real.v_prime(x).max() <= s_hi + 1e-12
    assert k_hi <= real.amp_sum


def test_scan_polishes_poorly_sampled_peak():
    # peak at x = 90 sits halfway between samples, its sample ranks far below the top 8
    def bumped(x):
        return np.cos(2 * np.pi * x) * (1 + 1e-3 * np.exp(-((x - 90) ** 2)))

    fmin, fmax = scan_extrema(bumped, 0.0, 1000 / 10.05, 1001)
    assert fmax == pytest.approx(1.001, abs=1e-8)
    assert fmin == pytest.approx(-(1 + 1e-3 * math.exp(-0.25)), abs=1e-7)


def test_mean_slope_bound():
    real = sample_field(FieldSpec.random_default(5))
    for window in (10.0, 100.0, 1000.0):
        mean = (real.v(window) - real.v(0.0)) / window
        assert abs(mean) <= 2 * real.amp_sum / window


def test_level_fraction_golden(golden):
    calc_alpha = level_fraction(golden, -0.5 * math.pi, 10.0)
    assert calc_alpha == pytest.approx(book_alpha, abs=5e-4)


def test_stats_golden(golden):
    stats = FieldPair.shear(golden, 0.6).stats(10.0)
    assert stats.tau == pytest.approx(book_s_hi, abs=1e-9)
    assert stats.alpha == pytest.approx(book_alpha, abs=5e-4)
    assert stats.admissible


def test_stats_invalid():
    with pytest.raises(InvalidSpecError):
        FieldStats(-1.0, 0.5, 10.0)
    with pytest.raises(InvalidSpecError):
        FieldStats(1.0, 1.5, 10.0)


def test_sample_table(golden):
    df = sample_table(golden, 2.0, 201)
    assert list(df.columns) == ["x", "v", "v_prime"]
    assert len(df) == 201
    assert df["v"].iloc[-1] == pytest.approx(0.5)


def test_general_pair_rejects_strain_at_peaks():
    with pytest.raises(InvalidSpecError):
        FieldPair.general(lambda x: np.cos(2 * np.pi * x), lambda x: np.cos(2 * np.pi * x))


def test_general_pair_accepts_shear_like():
    pair = FieldPair.general(lambda x: np.cos(2 * np.pi * x), lambda x: -np.sin(2 * np.pi * x), period=1.0)
    assert pair.tag == "general"
    assert pair.k(0.0) == pytest.approx(1.0)


def test_general_pair_unchecked(caplog):
    pair = FieldPair.general(lambda x: np.cos(2 * np.pi * x), lambda x: np.cos(2 * np.pi * x), check_peaks=False)
    assert pair.s(0.0) == pytest.approx(1.0)
    assert "without the local maximum strain check" in caplog.text


def test_flipped_and_shifted(golden):
    pair = FieldPair.shear(golden, 0.6)
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(pair.flipped().s(x), -pair.s(x))
    np.testing.assert_allclose(pair.flipped().k(x), pair.k(x))
    np.testing.assert_allclose(pair.shifted(1.0).k(x), pair.k(x) + 1.0)
    assert pair.shifted(1.0).default_window == pair.default_window
    assert pair.flipped().realization is golden
