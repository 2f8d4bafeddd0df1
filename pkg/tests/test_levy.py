import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import integrate, special

from choquet_lattice import distortion as D
from choquet_lattice import levy as L

CGMY = L.TailCGMY(1.0, 5.0, 5.0, 0.5)


def test_tail_value():
    assert float(CGMY.tail_plus(1.0)) == pytest.approx(math.exp(-5.0), rel=1e-12)


def test_sigma2_closed_form_vs_quadrature():
    quad = L.JumpMeasure.sigma2_total(CGMY)
    assert CGMY.sigma2_closed_form() == pytest.approx(quad, abs=1e-8)
    assert CGMY.sigma2_closed_form() == pytest.approx(0.317066, abs=1e-6)


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_interval_additivity(a, b, c):
    a, b, c = sorted((a, b, c))
    assume(b - a > 1e-9 and c - b > 1e-9)
    m = L.LevyModel(0.0, 0.04, CGMY)
    whole = m.sigma2_interval(a, c)
    assert whole == pytest.approx(m.sigma2_interval(a, b) + m.sigma2_interval(b, c), abs=1e-11)


@given(st.floats(1e-3, 5.0), st.floats(1e-3, 5.0))
def test_tails_nonincreasing(x, y):
    lo, hi = min(x, y), max(x, y)
    assert CGMY.tail_plus(lo) >= CGMY.tail_plus(hi)
    assert CGMY.tail_minus(lo) >= CGMY.tail_minus(hi)


def test_parameter_validation():
    with pytest.raises(L.ModelError):
        L.TailCGMY(1.0, 5.0, 5.0, 1.5)
    with pytest.raises(L.ModelError):
        L.LevyModel(0.0, 0.0)
    with pytest.raises(L.ModelError):
        L.LevyModel(0.0, 0.0, L.TailCGMY(1.0, 5.0, 1.5, 0.5), q=1.0)


def test_tilted_tail_identity():
    tilt = L.TiltedJumps(CGMY, D.JumpRateDistortion(D.PowerShift(0.5)))
    x = np.linspace(0.01, 5.0, 400)
    ref = L.cgmy_tilted_tail(1.0, 5.0, 0.5, 0.5, x)
    np.testing.assert_allclose(tilt.tail_plus(x), ref, rtol=1e-12)


def test_csharp_kernel_vs_quadrature():
    M, Y, g = 5.0, 0.5, 0.5
    f = lambda x: math.exp(-M * x / (1 + g)) * x ** (-Y / (1 + g))
    quad = integrate.quad(f, 0, 1)[0] + integrate.quad(f, 1, math.inf)[0]
    assert L.cgmy_csharp_kernel(M, Y, g) == pytest.approx(quad, abs=1e-6)
    u = (1 + g - Y) / (1 + g)
    assert L.cgmy_csharp_kernel(M, Y, g) == pytest.approx(special.gamma(u) * (M / (1 + g)) ** -u, rel=1e-14)


def test_tilt_excess_mean_matches_quadrature():
    tilt = L.TiltedJumps(L.TailCGMY(2.0, 5.0, 5.0, 0.5), D.JumpRateDistortion(D.PowerShift(0.5)))
    assert tilt.excess_mean() == pytest.approx(tilt._excess_side_integral("plus", 0), rel=1e-8)
    assert tilt.excess_mean() == pytest.approx(L.cgmy_csharp(2.0, 5.0, 0.5, 0.5), rel=1e-14)


def test_qsharp_gbm_drift():
    m = L.LevyModel.gbm(0.0, 0.2)
    q = L.tilt_qsharp(m, 0.5)
    assert q.drift_shift == pytest.approx(0.5 * 0.04)
    assert q.model.sigma2 == m.sigma2


def test_tabulated_tails_interpolation():
    xs = np.linspace(0.05, 3.0, 60)
    tab = L.TabulatedTails(tuple(xs), tuple(CGMY.tail_plus(xs)), tuple(CGMY.tail_minus(xs)))
    x = np.array([0.1, 0.7, 2.2])
    np.testing.assert_allclose(tab.tail_plus(x), CGMY.tail_plus(x), rtol=2e-3)
    assert float(tab.tail_plus(5.0)) == 0.0
    assert bool(tab.extrapolated(0.01))


def test_config_roundtrip():
    m = L.LevyModel(0.01, 0.04, CGMY)
    again = L.model_from_config(m.to_config())
    assert again.sigma2_total() == m.sigma2_total()
