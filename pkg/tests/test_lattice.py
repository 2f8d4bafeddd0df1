import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from choquet_lattice import lattice as LA
from choquet_lattice import levy as L

GBM = L.LevyModel.gbm(0.05, 0.2)
CGMY = L.LevyModel(0.0, 0.0, L.TailCGMY(1.0, 5.0, 5.0, 0.5))
CGMY_M10 = L.LevyModel(0.0, 0.0, L.TailCGMY(1.0, 5.0, 10.0, 0.5))


@given(st.integers(1, 5000), st.floats(0.05, 5.0))
def test_gbm_trinomial_exact(n, T):
    sd = LA.build_step_distribution(GBM, LA.make_grid(GBM, T, n))
    assert (sd.p_minus, sd.p_zero, sd.p_plus) == (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([CGMY, CGMY_M10]), st.integers(20, 1000))
def test_pure_jump_moments(m, n):
    g = LA.make_grid(m, 1.0, n)
    sd = LA.build_step_distribution(m, g)
    assert math.fsum(sd.probs) == pytest.approx(1.0, abs=1e-14)
    assert np.all(sd.probs >= 0)
    assert abs(sd.mean()) <= 1e-15
    assert sd.variance() == pytest.approx(g.delta * m.variance_rate(), rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([GBM, CGMY, CGMY_M10]), st.integers(20, 1000))
def test_bound_chain(m, n):
    g = LA.make_grid(m, 1.0, n)
    rep = LA.validate_conditions(m, g)
    assert rep["moment_bound_chain"].passed
    assert rep["tick_identity"].passed
    assert g.a * g.h <= 1.0


def test_choose_a_canonical():
    m = L.LevyModel(0.0, 0.04, L.TailCGMY(1.0, 5.0, 5.0, 0.5))
    assert LA.choose_a(m, 1e-3) == 219


def test_choose_a_jump_free():
    assert LA.choose_a(GBM, 0.01) == 2


def test_nonconforming_tick():
    g = LA.make_grid(GBM, 1.0, 10)
    bad = LA.make_grid(GBM, 1.0, 10, h=1.2 * g.h)
    with pytest.raises(LA.LatticeInfeasible) as exc:
        LA.build_step_distribution(GBM, bad)
    assert exc.value.condition == "tick_identity"


def test_inner_probability_lower_bound():
    m = L.LevyModel(0.0, 0.04, L.TailCGMY(0.01, 5.0, 5.0, 0.5))
    g = LA.grid_for_tick(m, 2.0 ** -10)
    sd = LA.build_step_distribution(m, g)
    assert min(sd.p_plus, sd.p_minus) >= LA.inner_probability_lower_bound(m, g)


def test_truncation_mass_bounded():
    g = LA.make_grid(CGMY, 1.0, 200, eps_trunc=1e-12)
    sd = LA.build_step_distribution(CGMY, g)
    assert sd.truncated_mass <= 1e-12


def test_characteristics_converge():
    f = lambda x: np.where(np.abs(x) >= 0.5, x * x / (1.0 + x * x), 0.0)
    gaps = []
    for n in (250, 1000):
        g = LA.make_grid(CGMY, 1.0, n)
        gaps.append(LA.characteristics_check(CGMY, g, 1.0, f, 0.5).jump_gap)
    assert gaps[1] < gaps[0]


def test_gbm_characteristics_exact():
    g = LA.make_grid(GBM, 1.0, 100)
    rep = LA.characteristics_check(GBM, g, 1.0, lambda x: np.zeros_like(x), 0.5)
    assert rep.variance_gap == pytest.approx(0.0, abs=1e-14)
    assert rep.drift_gap == pytest.approx(0.0, abs=1e-14)
