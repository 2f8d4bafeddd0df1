"""Invariant suite behind the ``check`` command.

Each check is a small, deterministic instance of a property the modules
promise.  ``run_checks`` returns one :class:`CheckResult` per property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import choquet, closedform, coupling, distortion, lattice, levy, valuation


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str = ""


_CHECKS: list[tuple[str, str, Callable[[], tuple[bool, str]]]] = []


def _check(module: str, name: str):
    def deco(fn):
        _CHECKS.append((module, name, fn))
        return fn
    return deco


def _families():
    return [distortion.MinMaxVar(0.5), distortion.Exponential(0.9),
            distortion.PiecewiseLinear(((0.0, 0.0), (0.2, 0.5), (1.0, 1.0)))]


def _random_dist(rng: np.random.Generator, n_max: int = 6) -> choquet.DiscreteDistribution:
    n = int(rng.integers(1, n_max + 1))
    p = rng.dirichlet(np.ones(n))
    p[-1] = 1.0 - math.fsum(p[:-1])
    return choquet.DiscreteDistribution(rng.normal(size=n), p)


# distortion ---------------------------------------------------------------


@_check("distortion", "axioms")
def _axioms():
    for D in [distortion.Linear()] + _families():
        r = distortion.check_distortion(D)
        if not all(r.values()):
            return False, f"{D!r}: {r}"
    return True, "linear, minmaxvar, exponential, piecewise_linear"


@_check("distortion", "dual_reverses_order")
def _dual():
    p = np.linspace(0.0, 1.0, 101)
    for D in _families():
        if np.any(D.dual(p) > p + 1e-15) or np.any(D(p) < p - 1e-15):
            return False, repr(D)
    return True, "Psi~(p) <= p <= Psi(p)"


@_check("distortion", "kd_constant_capped_identity")
def _kd():
    val = distortion.kd_constant(distortion.CappedIdentity(1.0))
    return abs(val - 4.0) < 1e-8, f"{val!r}"


# choquet ------------------------------------------------------------------


@_check("choquet", "bruteforce_matches_comonotone")
def _bruteforce():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        dist = _random_dist(rng)
        for psi in _families():
            val = choquet.choquet_probability(dist, psi)
            res = choquet.bruteforce_search(dist, psi, trials=500, seed=1)
            worst = max(worst, abs(res.value - val), float(np.max(res.samples)) - val)
    return worst <= 1e-9, f"max deviation {worst:.3g}"


@_check("choquet", "constants_and_translation")
def _translation():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        dist = _random_dist(rng)
        for psi in _families():
            base = choquet.choquet_probability(dist, psi)
            shifted = choquet.choquet_probability(dist.map(lambda v: 2.0 * v + 3.0), psi)
            worst = max(worst, abs(shifted - (2.0 * base + 3.0)))
            const = choquet.choquet_probability(dist.map(lambda v: 0.0 * v + 1.5), psi)
            worst = max(worst, abs(const - 1.5))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


@_check("choquet", "maximizing_density_attains")
def _maxdens():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(50):
        dist = _random_dist(rng)
        for psi in _families():
            md = choquet.maximizing_density(dist, psi)
            worst = max(worst, abs(md.expectation() - choquet.choquet_probability(dist, psi)))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


# levy ---------------------------------------------------------------------


@_check("levy", "cgmy_sigma2_closed_form")
def _cgmy_sigma2():
    j = levy.TailCGMY(1.0, 5.0, 5.0, 0.5)
    quad = levy.JumpMeasure.sigma2_total(j)
    cf = float(j.sigma2_closed_form())
    return abs(quad - cf) <= 1e-8, f"closed {cf!r}, quadrature {quad!r}"


@_check("levy", "interval_additivity")
def _additivity():
    m = levy.LevyModel(0.0, 0.04, levy.TailCGMY(1.0, 5.0, 5.0, 0.5))
    whole = m.sigma2_interval(-0.3, 0.7)
    parts = m.sigma2_interval(-0.3, 0.1) + m.sigma2_interval(0.1, 0.7)
    return abs(whole - parts) <= 1e-12, f"{whole!r} vs {parts!r}"


@_check("levy", "power_shift_tilted_tail")
def _tilted_tail():
    j = levy.TailCGMY(1.0, 5.0, 5.0, 0.5)
    tilt = levy.TiltedJumps(j, distortion.JumpRateDistortion(distortion.PowerShift(0.5)))
    x = np.linspace(0.01, 5.0, 500)
    ref = levy.cgmy_tilted_tail(1.0, 5.0, 0.5, 0.5, x)
    err = float(np.max(np.abs(tilt.tail_plus(x) - ref) / ref))
    return err <= 1e-12, f"max relative error {err:.3g}"


# lattice ------------------------------------------------------------------


@_check("lattice", "gbm_trinomial_exact")
def _gbm_exact():
    m = levy.LevyModel.gbm(0.0, 0.2)
    for n in (1, 7, 100, 1000):
        sd = lattice.build_step_distribution(m, lattice.make_grid(m, 1.0, n))
        if (sd.p_plus, sd.p_minus, sd.p_zero) != (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0):
            return False, f"n={n}: {sd.p_minus!r}, {sd.p_zero!r}, {sd.p_plus!r}"
    return True, "p = (1/6, 2/3, 1/6) bitwise"


@_check("lattice", "moments_and_bound_chain")
def _moments():
    models = [levy.LevyModel.gbm(0.05, 0.2),
              levy.LevyModel(0.0, 0.0, levy.TailCGMY(1.0, 5.0, 5.0, 0.5)),
              levy.LevyModel(0.0, 0.0, levy.TailCGMY(1.0, 5.0, 10.0, 0.5))]
    worst = 0.0
    for m in models:
        for n in (50, 250):
            g = lattice.make_grid(m, 1.0, n)
            rep = lattice.validate_conditions(m, g)
            if not rep["moment_bound_chain"].passed:
                return False, rep["moment_bound_chain"].detail
            sd = lattice.build_step_distribution(m, g)
            worst = max(worst, abs(sd.mean()), abs(sd.variance() - g.delta * m.variance_rate()) / g.delta)
    return worst <= 1e-9, f"max moment error {worst:.3g}"


@_check("lattice", "nonconforming_tick_rejected")
def _tick():
    m = levy.LevyModel.gbm(0.0, 0.2)
    g = lattice.make_grid(m, 1.0, 10)
    bad = lattice.make_grid(m, 1.0, 10, h=1.1 * g.h)
    try:
        lattice.build_step_distribution(m, bad)
    except lattice.LatticeInfeasible as exc:
        return exc.condition == "tick_identity", str(exc)
    return False, "no error raised"


# valuation ----------------------------------------------------------------


@_check("valuation", "linear_reduction_bitwise")
def _linear_reduction():
    m = levy.LevyModel.gbm(0.0, 0.2)
    g = lattice.make_grid(m, 1.0, 200)
    p = valuation.TerminalCall(100.0, 100.0)
    a = valuation.distorted_value(m, distortion.Linear(), p, g).value
    b = valuation.linear_value(m, p, g).value
    return a == b, f"{a!r} vs {b!r}"


@_check("valuation", "distorted_dominates_linear")
def _dominates():
    m = levy.LevyModel.gbm(0.0, 0.2)
    g = lattice.make_grid(m, 1.0, 200)
    F = distortion.SqrtBrownian(distortion.Exponential(0.9), 0.2)
    for p in (valuation.TerminalCall(100.0, 100.0), valuation.UpInDigital(100.0, 120.0)):
        d = valuation.distorted_value(m, F, p, g).value
        lin = valuation.linear_value(m, p, g).value
        if d < lin - 1e-12:
            return False, f"{p!r}: {d!r} < {lin!r}"
    return True, "call and up-in digital"


@_check("valuation", "translation_homogeneity")
def _trans():
    m = levy.LevyModel.gbm(0.0, 0.2)
    g = lattice.make_grid(m, 1.0, 100)
    F = distortion.SqrtBrownian(distortion.Exponential(0.9), 0.2)
    p = valuation.TerminalCall(100.0, 100.0)
    base = valuation.distorted_value(m, F, p, g).value
    aff = valuation.distorted_value(m, F, valuation.Affine(p, 2.0, 3.0), g).value
    err = abs(aff - (2.0 * base + 3.0))
    return err <= 1e-12 * max(1.0, abs(aff)), f"deviation {err:.3g}"


@_check("valuation", "path_enumeration_oracle")
def _enum():
    m = levy.LevyModel.gbm(0.0, 0.2)
    worst = 0.0
    for n in (1, 2, 3, 4):
        g = lattice.make_grid(m, 1.0, n)
        for psi in [distortion.Linear()] + _families():
            for p in (valuation.TerminalCall(1.0, 1.0), valuation.UpInDigital(1.0, 1.15)):
                a = valuation.distorted_value(m, psi, p, g).value
                b = valuation.enumerate_paths_value(m, psi, p, g)
                worst = max(worst, abs(a - b))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


# closedform ---------------------------------------------------------------


@_check("closedform", "call_matches_quadrature")
def _call_quad():
    worst = 0.0
    for dp in (0.0, 0.5, 1.0):
        spec = closedform.GbmSpec(100.0, 0.0, 0.2, 1.0, dp)
        for K in (80.0, 100.0, 120.0):
            worst = max(worst, abs(closedform.gbm_call(spec, K) - closedform.gbm_call_quadrature(spec, K)))
    return worst <= 1e-8, f"max deviation {worst:.3g}"


@_check("closedform", "reflection_vs_simulation")
def _reflection():
    spec = closedform.GbmSpec(100.0, 0.0, 0.2, 1.0)
    ref = closedform.gbm_upin_digital_reflection(spec, 120.0)
    mc, se = closedform.gbm_monte_carlo_upin(spec, 120.0, 20_000, 500, seed=3)
    # discrete monitoring can only lower the hit probability
    return mc <= ref + 3 * se, f"reflection {ref:.6f}, simulated {mc:.6f} +- {se:.1g}"


# coupling -----------------------------------------------------------------


@_check("coupling", "pathwise_domination")
def _domination():
    nu1 = coupling.ScaledExponential(1.0, 2.0)
    nu2 = coupling.ScaledExponential(2.0, 1.0)
    paths = coupling.couple_subordinators(nu1, nu2, 1.0, 2000, seed=42)
    r1 = coupling.marginal_check(paths, nu1, 1)
    r2 = coupling.marginal_check(paths, nu2, 2)
    ok = paths.domination_rate() == 1.0 and r1.passed and r2.passed
    return ok, f"domination {paths.domination_rate():.3f}, z = {r1.mean_z:.2f}, {r2.mean_z:.2f}"


@_check("coupling", "identical_measures_identical_paths")
def _identical():
    nu = coupling.ScaledExponential(1.5, 2.0)
    paths = coupling.couple_subordinators(nu, nu, 1.0, 500, seed=5)
    return bool(np.array_equal(paths.z1, paths.z2)), "Z1 == Z2 on every path"


def run_checks() -> list[CheckResult]:
    out = []
    for module, name, fn in _CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(module, name, bool(ok), detail))
    return out


__all__ = ["CheckResult", "run_checks"]
