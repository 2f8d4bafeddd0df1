import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from choquet_lattice import coupling as CP

NU1 = CP.ScaledExponential(1.0, 2.0)
NU2 = CP.ScaledExponential(2.0, 1.0)


def test_domination_and_marginals():
    paths = CP.couple_subordinators(NU1, NU2, 1.0, 10_000, seed=42)
    assert paths.domination_rate() == 1.0
    assert CP.marginal_check(paths, NU1, 1).passed
    assert CP.marginal_check(paths, NU2, 2).passed


def test_identical_measures():
    paths = CP.couple_subordinators(NU1, NU1, 1.0, 1000, seed=1)
    np.testing.assert_array_equal(paths.z1, paths.z2)


def test_zero_second_measure():
    paths = CP.couple_subordinators(NU1, CP.ScaledExponential(1.0, 0.0), 1.0, 5000, seed=3)
    assert np.all(paths.z2 == 0.0)
    assert CP.marginal_check(paths, NU1, 1).passed


def test_deterministic():
    a = CP.couple_subordinators(NU1, NU2, 1.0, 200, seed=9)
    b = CP.couple_subordinators(NU1, NU2, 1.0, 200, seed=9)
    assert a.z1.tobytes() == b.z1.tobytes() and a.z2.tobytes() == b.z2.tobytes()


def test_domination_violation():
    with pytest.raises(CP.DominationError):
        CP.couple_subordinators(NU2, NU1, 1.0, 10, seed=0)


@given(st.floats(1e-6, 1.0 - 1e-9))
def test_inverse_cdf_ordered(u):
    C = max(NU1.mass, NU2.mass)
    u = np.array([u])
    assert CP.inverse_cdf(NU1, C, u)[0] >= CP.inverse_cdf(NU2, C, u)[0]


@settings(max_examples=25)
@given(st.floats(0.0, 1.0 - 1e-9))
def test_tabulated_inverse_matches_exponential(u):
    xs = np.linspace(0.0, 40.0, 40001)
    tab = CP.TabulatedSubordinator(tuple(xs), tuple(NU1.tail(xs)))
    a = CP.inverse_cdf(tab, 2.0, np.array([u]))[0]
    b = CP.inverse_cdf(NU1, 2.0, np.array([u]))[0]
    assert a == pytest.approx(b, abs=1e-3)
