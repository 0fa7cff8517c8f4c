import numpy as np
import pytest

from field.shear import FieldSpec, sample_field
from hamilton.hamiltonian import StrainHamiltonian, critical_point
from homog import effective
from homog.corrector import corrector
from homog.effective import EffectiveHamiltonian
from strain.curve import check_lipschitz, max_increase, strain_curve

# default three mode random phase field on a short window, slope (m, n) = (0.6, 0.8)
window = 40.0


@pytest.fixture(scope="module", params=[0, 1, 2])
def real(request):
    return sample_field(FieldSpec.random_default(request.param))


@pytest.fixture(scope="module")
def eff(real):
    return EffectiveHamiltonian(StrainHamiltonian.shear(real, 0.6, 0.5), window)


def test_flat_value_dominates_samples(real, eff):
    x = np.linspace(0, window, 40001)
    p_star, h_min = critical_point(eff.h, x)
    assert h_min.max() <= eff.h_star + 1e-9
    assert eff.h_star >= 0.6 + 0.6 * real.v(x).max() - 1e-12
    assert eff.h_star <= 0.6 + 0.6 * real.amp_sum


def test_branch_book_monotone(eff):
    assert eff.book.is_monotone()
    pm, pp = eff.p_bar
    assert pm < pp
    assert eff.H_bar(pp + 0.5) > eff.h_star
    assert eff.P_plus(eff.H_bar(pp + 0.5)) == pytest.approx(pp + 0.5, abs=1e-7)


def test_corrector_drift_shrinks(real):
    h = StrainHamiltonian.shear(real, 0.6, 0.5)
    mu = 0.6 + 0.6 * real.amp_sum + 0.5
    short = corrector(h, mu, window)
    wide = corrector(h, mu, 2 * window)
    assert wide.drift < 2e-2
    assert wide.drift <= short.drift + 2e-3


def test_strain_curve_monotone_lipschitz(real):
    curve = strain_curve(real, 0.6, 0.8, np.linspace(0, 2, 9), window)
    assert max_increase(curve) <= 1e-3
    assert check_lipschitz(curve) <= 1.05
    assert np.all(curve.h_ray >= curve.h_star - 1e-9)


def test_grid_doubling_capped(real, monkeypatch):
    monkeypatch.setattr(effective, "MAX_POINTS", 10000)
    capped = EffectiveHamiltonian(StrainHamiltonian.shear(real, 0.6, 0.5), window)
    assert len(capped.x_ray) <= 10000
