import math

import numpy as np
import pytest
from scipy import integrate, optimize

from field.shear import PERIODIC, FieldPair, FieldSpec, sample_field
from hamilton.hamiltonian import StrainHamiltonian
from homog.effective import EffectiveHamiltonian
from strain.curve import (
    check_lipschitz,
    max_increase,
    oriented_pair,
    strain_curve,
    strict_decrease_gaps,
    unit_slope,
)
from strain.identity import HypothesisError, claim1_check, differentiated_identity_check
from strain.theorem import main_theorem_check

# golden field, slope (m, n) = (0.6, 0.8), one period window
book_h_star = 0.9
book_s_norm = 0.6 * math.pi


def flow_only_level(n):
    """h(0) solving ∫ √((μ - 0.3 cos 2πx)² - 0.36) dx = n"""

    def avg(mu):
        val, err = integrate.quad(lambda x: math.sqrt((mu - 0.3 * math.cos(2 * math.pi * x)) ** 2 - 0.36), 0, 1, epsabs=1e-13)
        return val - n

    return optimize.brentq(avg, 1.0, 3.0, xtol=1e-13)


@pytest.fixture(scope="module")
def golden():
    return sample_field(FieldSpec.golden())


@pytest.fixture(scope="module")
def curve(golden):
    return strain_curve(golden, 0.6, 0.8, np.linspace(0, 1, 6), 1.0)


def test_curve_starts_at_flow_only_value(curve):
    book_h0 = flow_only_level(0.8)
    assert curve.h_ray[0] == pytest.approx(book_h0, abs=1e-6)
    assert curve.h_at(0.0) == curve.h_ray[0]


def test_curve_scalars(curve):
    assert curve.h_star == pytest.approx(book_h_star, abs=1e-12)
    assert curve.s_norm == pytest.approx(book_s_norm, abs=1e-9)
    assert len(curve) == 6


def test_curve_non_increasing(curve):
    assert max_increase(curve) <= 1e-9
    assert np.all(curve.h_ray >= curve.h_star - 1e-9)


def test_curve_lipschitz(curve):
    assert check_lipschitz(curve) <= 1.0 + 1e-6


def test_curve_strictly_decreasing_above_flat(curve):
    gaps = strict_decrease_gaps(curve)
    assert len(gaps) >= 1
    assert np.all(gaps > 0)


def test_curve_frame(curve):
    df = curve.to_frame()
    assert list(df.columns) == ["c", "h", "flat_flag"]
    assert set(df["flat_flag"]) <= {0, 1}
    assert "flat" in repr(curve)


def test_h_at_off_grid(curve):
    with pytest.raises(KeyError):
        curve.h_at(0.33)


def test_negative_n_uses_sign_symmetry(golden):
    pair, n = oriented_pair(golden, 0.6, -0.8)
    assert n == 0.8
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(pair.s(x), -0.6 * golden.v_prime(x))

    flipped = strain_curve(golden, 0.6, -0.8, [0.3], 1.0)
    eff = EffectiveHamiltonian(StrainHamiltonian.shear(golden, 0.6, 0.3), 1.0)
    assert flipped.h_ray[0] == pytest.approx(eff.H_bar(-0.8), abs=1e-8)


@pytest.mark.parametrize(
    "m, n, c_grid",
    [(0.0, 1.0, [0.0, 0.1]), (1.0, 0.0, [0.0, 0.1]), (0.6, 0.8, [0.2, 0.1]), (0.6, 0.8, [-0.1, 0.1]), (0.6, 0.8, [])],
)
def test_invalid_curve_inputs(golden, m, n, c_grid):
    with pytest.raises(ValueError):
        strain_curve(golden, m, n, c_grid, 1.0)


def test_unit_slope(caplog):
    m, n = unit_slope(1.2, 1.6)
    assert (m, n) == pytest.approx((0.6, 0.8))
    assert "normalizing" in caplog.text
    assert unit_slope(0.6, 0.8) == (0.6, 0.8)
    with pytest.raises(ValueError):
        unit_slope(0.0, 0.0)


def test_sandwich_and_reduction(golden):
    report = main_theorem_check(golden, 0.6, 0.8, [0.2, 0.5], 1.0)
    assert list(report.frame["c"]) == [0.0, 0.2, 0.5]
    assert report.lower == pytest.approx(book_h_star, abs=1e-12)
    assert report.passed
    assert report.reduces
    assert not report.flow_trivial
    assert report.edge is None


def test_zero_field_has_no_reduction():
    real = sample_field(FieldSpec.zero())
    report = main_theorem_check(real, 0.6, 0.8, [0.5, 1.0], 1.0)
    assert report.flow_trivial
    assert report.passed
    assert not report.reduces
    np.testing.assert_allclose(report.frame["h"], 1.0, atol=1e-10)


def test_zero_amplitude_mode_is_trivial():
    real = sample_field(FieldSpec(PERIODIC, amplitudes=[0.0], frequencies=[1.0]))
    report = main_theorem_check(real, 0.6, 0.8, [0.5, 1.0], 1.0)
    assert report.flow_trivial
    assert report.passed
    assert not report.reduces
    np.testing.assert_allclose(report.frame["h"], 1.0, atol=1e-10)
    assert FieldPair.shear(real, 0.6).is_zero


def test_edge_m_zero(golden):
    report = main_theorem_check(golden, 0.0, 1.0, [0.5])
    assert report.edge == "m=0"
    assert np.all(report.frame["h"] == 1.0)
    assert report.passed


def test_edge_n_zero(golden):
    report = main_theorem_check(golden, 1.0, 0.0, [0.5], 1.0)
    assert report.edge == "n=0"
    assert report.lower == pytest.approx(1.5, abs=1e-12)
    assert np.all(report.frame["h"] == report.lower)


def test_claim1_positivity(golden):
    result = claim1_check(golden, 0.6, 0.8, 0.2, 1.0)
    assert result.passed
    assert result.min_shift > 0
    assert result.min_slope > 0
    assert result.mu > book_h_star


def test_differentiated_identity(golden):
    result = differentiated_identity_check(golden, 0.6, 0.8, 0.2, 1e-3, 1.0)
    assert result.passed
    assert result.dh < 0
    assert result.resid < 1e-4
    assert result.e_inv > 0
    assert result.e_ratio < 0
    assert abs(result.e_dcu) < 1e-6


def test_identity_forward_difference_at_zero(golden):
    result = differentiated_identity_check(golden, 0.6, 0.8, 0.0, 1e-3, 1.0)
    assert result.passed
    assert result.e_ratio == pytest.approx(0.0, abs=1e-6)
    assert result.dh <= 0
    assert result.e_inv > 0


def test_claim1_needs_lifted_curve(golden):
    with pytest.raises(HypothesisError):
        claim1_check(golden, 0.6, 0.8, 400.0, 1.0)
