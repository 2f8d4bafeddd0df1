import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from choquet_lattice import distortion as D
from conftest import FAMILIES, distortions, probs01


def test_minmaxvar_value():
    assert D.MinMaxVar(1.0)(0.5) == pytest.approx(0.914214, abs=1e-6)


def test_exponential_value():
    assert D.Exponential(0.9)(0.5) == pytest.approx(0.610639, abs=1e-6)


def test_domain_error():
    with pytest.raises(D.DomainError):
        D.MinMaxVar(1.0)(1.5)
    with pytest.raises(D.DomainError):
        D.Exponential(1.0)(-0.1)


@pytest.mark.parametrize("psi", FAMILIES)
def test_check_distortion_passes(psi):
    assert all(D.check_distortion(psi).values())


@given(distortions(), probs01)
def test_endpoints_and_range(psi, p):
    assert psi(0.0) == 0.0
    assert psi(1.0) == pytest.approx(1.0, abs=1e-15)
    assert -1e-15 <= psi(p) <= 1.0 + 1e-15


@given(distortions(), probs01, probs01)
def test_monotone(psi, p, q):
    lo, hi = min(p, q), max(p, q)
    assert psi(lo) <= psi(hi) + 1e-14


@given(distortions(), probs01, probs01, st.floats(0.0, 1.0))
def test_concave(psi, p, q, t):
    mid = t * p + (1 - t) * q
    assert psi(mid) >= t * psi(p) + (1 - t) * psi(q) - 1e-12


@given(distortions(), probs01)
def test_dual_bounds(psi, p):
    assert psi.dual(p) <= p + 1e-14 <= psi(p) + 2e-14
    assert psi.dual(p) == pytest.approx(1.0 - psi(1.0 - p), abs=1e-15)


def test_config_roundtrip():
    for psi in FAMILIES:
        again = D.distortion_from_config(psi.to_config())
        p = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(again(p), psi(p))


def test_kd_constant():
    assert D.kd_constant(D.CappedIdentity(1.0)) == pytest.approx(4.0, rel=1e-8)
    assert D.kd_constant(D.PowerMap(0.5, 2.0 / 3.0)) == math.inf
    assert D.kd_constant(D.ZeroMap()) == 0.0
    assert D.kd_constant(D.Linear()) == pytest.approx(4.0, rel=1e-8)


@given(st.floats(0.01, 10.0), st.floats(0.0, 30.0))
def test_power_shift_dominates_identity(g, lam):
    assert D.PowerShift(g)(lam) >= lam


def test_jump_rate_check():
    gamma = D.JumpRateDistortion(D.PowerShift(0.5))
    assert all(D.check_jump_rate(gamma).values())


def test_sqrt_brownian_xi_exact():
    F = D.SqrtBrownian(D.Exponential(0.9), sigma=0.2)
    est = D.estimate_xi(F, 1.0 / 6.0)
    assert est == pytest.approx(float(F.xi(1.0 / 6.0)), rel=1e-10)


def test_general_example_limits():
    F = D.GeneralExample(D.Exponential(0.9), D.MinMaxVar(0.5), D.MinMaxVar(0.5))
    assert D.estimate_xi(F, 0.3) == pytest.approx(float(F.xi(0.3)), abs=1e-4)
    for lam in (0.5, 2.0):
        assert D.estimate_gamma(F, lam, "plus") == pytest.approx(float(F.gamma_plus()(lam)), abs=1e-4)


def test_convex_cgmy_gamma_limits():
    F = D.ConvexCGMY(0.5)
    lam = 3.0
    assert D.estimate_gamma(F, lam, "plus") == pytest.approx(float(D.PowerShift(0.5)(lam)), rel=1e-5)
    assert D.estimate_gamma(F, lam, "minus") == pytest.approx(lam, rel=1e-5)


def test_convex_cgmy_xi():
    assert np.all(D.ConvexCGMY(2.0).xi(np.array([0.2, 0.5])) == 0.0)
    assert D.estimate_xi(D.ConvexCGMY(2.0), 0.5) == pytest.approx(0.0, abs=1e-3)
    with pytest.raises(D.NonConvergence):
        D.estimate_xi(D.ConvexCGMY(0.5), 0.5)


@settings(max_examples=30)
@given(st.floats(1e-6, 1.0), probs01)
def test_scaled_family_is_distortion_value(delta, p):
    F = D.SqrtBrownian(D.MinMaxVar(1.0))
    v = D.scaled_eval(F, p, delta)
    assert p - 1e-15 <= v <= 1.0 + 1e-15


def test_extrapolate_limit_geometric():
    vals = [1.0 + 0.5 ** k for k in range(8)]
    assert D.extrapolate_limit(vals) == pytest.approx(1.0, abs=1e-10)
