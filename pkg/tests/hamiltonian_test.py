import math

import numpy as np
import pytest

from field.shear import FieldSpec, sample_field
from hamilton.hamiltonian import (
    InconsistentBoundsError,
    NoRootError,
    StrainHamiltonian,
    branch_roots,
    critical_point,
    cubic_root,
    dham,
    eval_dHdp,
    eval_H,
    ham,
    hamiltonian_surface,
    p_plus_minus,
)


@pytest.fixture
def golden():
    return sample_field(FieldSpec.golden())


def test_ham_flat_flow():
    assert ham(0.8, 0.6, 0.0, 0.0, 0.0) == pytest.approx(1.0)
    assert ham(0.0, 1.0, 2.0, 0.0, 3.0) == pytest.approx(1.0)


def test_ham_with_strain():
    book_H = math.sqrt(2) + 1 / math.sqrt(2) + 0.1
    assert ham(1.0, 1.0, 0.5, 0.1, 2.0) == pytest.approx(book_H)


@pytest.mark.parametrize("c", [0.0, 0.3, 2.0])
def test_dham_matches_central_difference(c):
    p = np.linspace(-3, 3, 61)
    step = 1e-6
    diff = (ham(p + step, 0.6, c, 0.2, -1.3) - ham(p - step, 0.6, c, 0.2, -1.3)) / (2 * step)
    np.testing.assert_allclose(dham(p, 0.6, c, -1.3), diff, atol=1e-7)


def test_cubic_root():
    cs = np.linspace(-5, 5, 101)
    p = cubic_root(0.6, cs)
    resid = p**3 + 0.36 * p + 0.36 * cs
    np.testing.assert_allclose(resid, 0.0, atol=1e-12)
    assert np.all(p * cs <= 0)
    assert np.all(np.abs(p) <= np.abs(cs) + 1e-15)


def test_critical_point_is_minimum(golden):
    h = StrainHamiltonian.shear(golden, 0.6, 1.5)
    x = np.linspace(0, 1, 41)
    p_star, h_min = critical_point(h, x)
    np.testing.assert_allclose(h.dHdp(p_star, x), 0.0, atol=1e-12)
    assert np.all(h.H(p_star - 0.1, x) > h_min)
    assert np.all(h.H(p_star + 0.1, x) > h_min)


def test_branch_roots_without_strain(golden):
    h = StrainHamiltonian.shear(golden, 1.0, 0.0)
    k = 0.5 * math.cos(0.6 * math.pi)
    book_q = math.sqrt((2.0 - k) ** 2 - 1)
    roots = branch_roots(h, 0.3, 2.0)
    assert roots.q_plus == pytest.approx(book_q, abs=1e-10)
    assert roots.q_minus == pytest.approx(-book_q, abs=1e-10)


@pytest.mark.parametrize("c", [0.2, 1.5, 10.0])
def test_branch_roots_with_strain(golden, c):
    h = StrainHamiltonian.shear(golden, 0.6, c)
    x = np.linspace(0, 1, 257)
    p_star, h_min = critical_point(h, x)
    mu = float(h_min.max()) + 0.5
    roots = branch_roots(h, x, mu)
    np.testing.assert_allclose(h.H(roots.q_plus, x), mu, atol=1e-10)
    np.testing.assert_allclose(h.H(roots.q_minus, x), mu, atol=1e-10)
    assert np.all(roots.q_minus < p_star)
    assert np.all(roots.q_plus > p_star)
    assert np.all(h.dHdp(roots.q_minus, x) < 0)
    assert np.all(h.dHdp(roots.q_plus, x) > 0)


def test_no_root_below_minimum(golden):
    h = StrainHamiltonian.shear(golden, 1.0, 0.0)
    with pytest.raises(NoRootError):
        branch_roots(h, 0.0, 1.2)


def test_boundaries_touch_at_flow_peak(golden):
    h = StrainHamiltonian.shear(golden, 1.0, 0.7)
    h_star = h.flat_level(1.0)
    assert h_star == pytest.approx(1.5, abs=1e-12)
    p_minus, p_plus = p_plus_minus(h, 0.0, h_star)
    assert p_minus == pytest.approx(0.0, abs=1e-12)
    assert p_plus == pytest.approx(0.0, abs=1e-12)

    p_minus, p_plus = p_plus_minus(h, np.array([0.25, 0.5]), h_star)
    assert np.all(p_minus < 0) and np.all(p_plus > 0)


def test_inconsistent_bounds(golden):
    h = StrainHamiltonian.shear(golden, 1.0, 0.0)
    with pytest.raises(InconsistentBoundsError):
        p_plus_minus(h, 0.0, 1.0)


def test_condition_returns_new_instance(golden):
    h = StrainHamiltonian.shear(golden, 0.6)
    h2 = h.condition(0.7)
    assert h.c == 0.0
    assert h2.c == 0.7
    assert h2.pair is h.pair
    assert h.mode == "shear"


@pytest.mark.parametrize("m, c", [(0.0, 0.1), (0.6, -0.1), (math.nan, 0.0)])
def test_invalid_hamiltonian(golden, m, c):
    with pytest.raises(ValueError):
        StrainHamiltonian.shear(golden, m, c)


def test_slope_bound(golden):
    h = StrainHamiltonian.shear(golden, 0.6, 1.0)
    assert h.slope_bound(10.0) == pytest.approx(1 + math.pi, abs=1e-8)
    x = np.linspace(0, 1, 101)
    p = np.linspace(-20, 20, 101)
    assert np.all(np.abs(eval_dHdp(h, p[:, None], x[None, :])) <= h.slope_bound(10.0) + 1e-12)


def test_eval_H_broadcasts(golden):
    h = StrainHamiltonian.shear(golden, 0.6, 0.4)
    vals = eval_H(h, np.array([0.0, 1.0])[:, None], np.linspace(0, 1, 5)[None, :])
    assert vals.shape == (2, 5)


def test_hamiltonian_surface(golden):
    h = StrainHamiltonian.shear(golden, 0.6, 0.4)
    df = hamiltonian_surface(h, np.linspace(-1, 1, 5), np.linspace(0, 1, 7))
    assert list(df.columns) == ["p", "x", "H"]
    assert len(df) == 35
    row = df.iloc[8]
    assert row["H"] == pytest.approx(float(h.H(row["p"], row["x"])))
