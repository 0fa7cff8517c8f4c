import math

import numpy as np
import pytest
from scipy import integrate, optimize

from field.shear import FieldSpec, sample_field
from hamilton.hamiltonian import StrainHamiltonian, critical_point
from homog.corrector import corrector, verify_cell
from homog.effective import (
    EffectiveHamiltonian,
    FlatPieceError,
    OutOfRangeError,
    P_plus,
    effective_H,
    mu_branch,
    worker_count,
)

# golden field with m = 0.6, one period is an exact averaging window
book_h_star = 0.9


def upper_root_average(h, mu):
    """P+ by adaptive quadrature of a pointwise brentq root"""

    def root(x):
        p_star, h_min = critical_point(h, x)
        return optimize.brentq(lambda p: float(h.H(p, x)) - mu, float(p_star), 100.0, xtol=1e-14)

    value, err = integrate.quad(root, 0.0, 1.0, epsabs=1e-11, limit=200)
    return value


@pytest.fixture(scope="module")
def golden():
    return sample_field(FieldSpec.golden())


@pytest.fixture(scope="module")
def flat_eff(golden):
    return EffectiveHamiltonian(StrainHamiltonian.shear(golden, 0.6, 0.0), 1.0)


@pytest.fixture(scope="module")
def strain_eff(golden):
    return EffectiveHamiltonian(StrainHamiltonian.shear(golden, 0.6, 0.5), 1.0)


def test_zero_field_exact():
    real = sample_field(FieldSpec.zero())
    eff = EffectiveHamiltonian(StrainHamiltonian.shear(real, 0.6, 0.5), 1.0)
    assert eff.h_star == pytest.approx(0.6, abs=1e-14)
    assert eff.p_bar == (0.0, 0.0)
    assert eff.P_plus(1.0) == pytest.approx(0.8, abs=1e-12)
    assert eff.P_minus(1.0) == pytest.approx(-0.8, abs=1e-12)
    assert eff.H_bar(0.8) == pytest.approx(1.0, abs=1e-10)
    assert eff.H_bar(-0.8) == pytest.approx(1.0, abs=1e-10)
    for p in np.linspace(-3, 3, 50):
        assert eff.H_bar(p) == pytest.approx(math.hypot(0.6, p), abs=1e-8)


def test_flat_value(flat_eff, strain_eff):
    assert flat_eff.h_star == pytest.approx(book_h_star, abs=1e-12)
    assert strain_eff.h_star == pytest.approx(book_h_star, abs=1e-12)


@pytest.mark.parametrize("mu", [1.6, 2.0, 3.0])
def test_upper_average_without_strain(flat_eff, mu):
    def root(x):
        return math.sqrt((mu - 0.3 * math.cos(2 * math.pi * x)) ** 2 - 0.36)

    book_P, err = integrate.quad(root, 0.0, 1.0, epsabs=1e-12)
    assert flat_eff.P_plus(mu) == pytest.approx(book_P, abs=1e-6)


@pytest.mark.parametrize("mu", [1.6, 2.0, 3.0])
def test_unit_slope_oracle(golden, mu):
    eff = EffectiveHamiltonian(StrainHamiltonian.shear(golden, 1.0, 0.0), 1.0)
    assert eff.h_star == pytest.approx(1.5, abs=1e-12)

    def root(x):
        return math.sqrt((mu - 0.5 * math.cos(2 * math.pi * x)) ** 2 - 1.0)

    book_P, err = integrate.quad(root, 0.0, 1.0, epsabs=1e-12)
    calc_P = eff.P_plus(mu)
    assert calc_P == pytest.approx(book_P, abs=1e-6)
    assert eff.mu_branch(calc_P) == pytest.approx(mu, abs=1e-6)


@pytest.mark.parametrize("mu", [1.6, 2.0, 3.0])
def test_upper_average_with_strain(golden, strain_eff, mu):
    book_P = upper_root_average(strain_eff.h, mu)
    assert strain_eff.P_plus(mu) == pytest.approx(book_P, abs=1e-6)


def test_branches_symmetric_without_strain(flat_eff):
    for mu in (1.0, 1.5, 2.5):
        assert flat_eff.P_minus(mu) == pytest.approx(-flat_eff.P_plus(mu), abs=1e-10)


def test_inverse_round_trip(strain_eff):
    for mu in (1.2, 1.5, 2.5):
        assert strain_eff.H_bar(strain_eff.P_plus(mu)) == pytest.approx(mu, abs=1e-8)
        assert strain_eff.H_bar(strain_eff.P_minus(mu)) == pytest.approx(mu, abs=1e-8)


def test_level_at_flat_value(strain_eff):
    with pytest.raises(OutOfRangeError):
        strain_eff.P_plus(strain_eff.h_star)
    with pytest.raises(OutOfRangeError):
        strain_eff.estimate(strain_eff.h_star - 0.1)


def test_flat_piece(flat_eff):
    pm, pp = flat_eff.p_bar
    assert pm < 0 < pp
    assert flat_eff.on_flat(0.0)
    assert flat_eff.H_bar(0.0) == flat_eff.h_star
    assert flat_eff.flat_gap == pytest.approx(pp - pm)
    with pytest.raises(FlatPieceError):
        flat_eff.mu_branch(0.0, upper=True)
    with pytest.raises(FlatPieceError):
        flat_eff.mu_branch(0.0, upper=False)


def test_flat_piece_endpoint(golden):
    eff = EffectiveHamiltonian(StrainHamiltonian.shear(golden, 0.6, 0.0), 1.0, pts_per_unit=4096)

    def root(x):
        return math.sqrt(max((book_h_star - 0.3 * math.cos(2 * math.pi * x)) ** 2 - 0.36, 0.0))

    book_p, err = integrate.quad(root, 0.0, 1.0, epsabs=1e-12)
    assert eff.p_bar[1] == pytest.approx(book_p, abs=1e-6)
    assert eff.p_bar[0] == pytest.approx(-book_p, abs=1e-6)


def test_branch_book(strain_eff):
    book = strain_eff.book
    assert len(book) >= strain_eff.count
    assert book.is_monotone()
    assert book.pp_ray[0] >= strain_eff.p_bar[1] - 1e-9
    df = book.to_frame()
    assert list(df.columns) == ["mu", "P_plus", "P_minus"]
    assert df["mu"].is_monotonic_increasing
    assert "P_plus" in repr(book)


def test_effective_curve_minimum_on_flat(strain_eff):
    df = strain_eff.curve_frame(np.linspace(-3, 3, 13))
    assert list(df.columns) == ["p", "H_bar"]
    assert np.all(df["H_bar"] >= strain_eff.h_star - 1e-12)
    assert df["H_bar"].iloc[6] == strain_eff.h_star


def test_window_estimate(golden):
    eff = EffectiveHamiltonian(StrainHamiltonian.shear(golden, 0.6, 0.5), 2.0)
    value, err = eff.estimate(1.5)
    assert err < 1e-9
    assert value == pytest.approx(eff.P_plus(1.5), abs=1e-14)


def test_module_functions(golden, strain_eff):
    h = strain_eff.h
    assert P_plus(h, 1.5, 1.0) == pytest.approx(strain_eff.P_plus(1.5), abs=1e-12)
    assert effective_H(h, 0.0, 1.0) == pytest.approx(book_h_star, abs=1e-12)
    p = strain_eff.P_plus(2.0)
    assert mu_branch(h, p, "upper", 1.0) == pytest.approx(2.0, abs=1e-8)
    with pytest.raises(ValueError):
        mu_branch(h, p, "middle", 1.0)


@pytest.mark.parametrize("kwargs", [{"gap": 0.0}, {"gap": 1.0, "span": 0.5}, {"count": 1}])
def test_invalid_level_grid(golden, kwargs):
    with pytest.raises(ValueError):
        EffectiveHamiltonian(StrainHamiltonian.shear(golden, 0.6, 0.5), 1.0, **kwargs)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("GSTRAIN_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("GSTRAIN_WORKERS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("GSTRAIN_WORKERS", "many")
    assert 1 <= worker_count() <= 4
    monkeypatch.delenv("GSTRAIN_WORKERS")
    assert 1 <= worker_count() <= 4


def test_corrector_solves_cell_problem(golden, strain_eff):
    h = strain_eff.h
    corr = corrector(h, 1.5, 1.0, grid_step=1e-3)
    assert corr.gamma_ray[0] == 0.0
    assert corr.gamma_ray[-1] == pytest.approx(0.0, abs=1e-12)
    assert corr.p_avg == pytest.approx(strain_eff.P_plus(1.5), abs=1e-6)
    assert verify_cell(h, 1.5, corr.p_avg, corr) < 1e-9
    assert verify_cell(h, 1.5, corr.p_avg + 0.1, corr) > 1e-3


def test_corrector_sublinear(golden):
    h = StrainHamiltonian.shear(golden, 0.6, 0.5)
    corr = corrector(h, 1.5, 10.0)
    wide = corrector(h, 1.5, 20.0)
    assert corr.window == pytest.approx(10.0)
    # periodic γ is bounded, so doubling the window about halves sup |γ|/x
    assert wide.drift / corr.drift <= 0.6
    assert corr.drift <= 2 * np.abs(corr.gamma_ray).max() / corr.window + 1e-12


def test_corrector_below_flat_value(golden):
    h = StrainHamiltonian.shear(golden, 0.6, 0.5)
    with pytest.raises(OutOfRangeError):
        corrector(h, 0.85, 1.0)
