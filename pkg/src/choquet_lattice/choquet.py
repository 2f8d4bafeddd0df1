"""Choquet integrals of discrete laws and of step functions on jump measures.

The probability-case integral is evaluated in summation-by-parts form,

    C[X] = v_min + sum_j (v_(j) - v_(j+1)) psi(F_j),

with values sorted in descending order and ``F_j`` the probability of the top
``j`` values.  Tied values contribute a zero difference, so the result does
not depend on how ties are ordered, and constants are reproduced exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .distortion import (DriftShift, JumpRateDistortion, MeasureMap,
                         ProbabilityDistortion)

PROB_SUM_TOL = 1e-12
MAX_BRUTEFORCE_ATOMS = 12


class InvalidDistribution(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite law given by atoms ``(value, prob)``.

    Equal values are merged and atoms are sorted by value on construction.
    """

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if v.size == 0 or v.shape != p.shape:
            raise InvalidDistribution("values and probs must be non-empty and aligned")
        if not np.all(np.isfinite(v)):
            raise InvalidDistribution("values must be finite")
        if np.any(~np.isfinite(p)) or np.any(p <= 0):
            raise InvalidDistribution("probabilities must be positive")
        if abs(math.fsum(p) - 1.0) > PROB_SUM_TOL:
            raise InvalidDistribution(f"probabilities sum to {math.fsum(p)!r}, not 1")
        uniq, inv = np.unique(v, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, p)
        uniq.flags.writeable = False
        merged.flags.writeable = False
        object.__setattr__(self, "values", uniq)
        object.__setattr__(self, "probs", merged)

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]]) -> "DiscreteDistribution":
        atoms = list(atoms)
        return cls(np.array([a[0] for a in atoms]), np.array([a[1] for a in atoms]))

    @property
    def n_atoms(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def map(self, f: Callable[[np.ndarray], np.ndarray]) -> "DiscreteDistribution":
        return DiscreteDistribution(f(self.values), self.probs)


def _abel(v_desc: np.ndarray, w: np.ndarray) -> float:
    """``v_last + sum_j (v_j - v_{j+1}) w_j`` for descending ``v``."""
    if v_desc.size == 1:
        return float(v_desc[0])
    return float(v_desc[-1] + np.dot(v_desc[:-1] - v_desc[1:], w[:-1]))


def choquet_probability(dist: DiscreteDistribution, psi: ProbabilityDistortion) -> float:
    """Distorted expectation of a finite law."""
    v = dist.values[::-1]
    cum = np.cumsum(dist.probs[::-1])
    return _abel(v, psi.unchecked(cum))


def choquet_rows(values: np.ndarray, probs: np.ndarray,
                 psi: ProbabilityDistortion) -> np.ndarray:
    """Row-wise Choquet integrals.

    ``values`` has shape ``(N, S)``; every row is paired with the same
    probability vector ``probs`` of length ``S``.  Sorting is stable, so the
    result depends only on the inputs.
    """
    values = np.asarray(values, dtype=float)
    order = np.argsort(-values, axis=1, kind="stable")
    vs = np.take_along_axis(values, order, axis=1)
    if vs.shape[1] == 1:
        return vs[:, 0].copy()
    cum = np.cumsum(probs[order[:, :-1]], axis=1)
    w = psi.unchecked(cum)
    return vs[:, -1] + np.sum((vs[:, :-1] - vs[:, 1:]) * w, axis=1)


def comonotone_weights(probs_desc: np.ndarray, psi: ProbabilityDistortion) -> np.ndarray:
    """Psi-increments for atoms listed in descending value order.

    The returned weights sum to one exactly in the last position's complement
    form, i.e. ``w[-1] = 1 - psi(F_{m-1})``.
    """
    cum = np.cumsum(probs_desc)
    g = psi.unchecked(cum[:-1])
    w = np.empty_like(probs_desc, dtype=float)
    w[0] = g[0] if g.size else 1.0
    if g.size:
        w[1:-1] = np.diff(g)
        w[-1] = 1.0 - g[-1]
    return w


@dataclass(frozen=True)
class StepFunctionOnMeasure:
    """Simple function given as ``(mass, level)`` pieces.

    Levels may be negative for signed integrands (see :func:`driver_g`).
    """

    masses: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float).ravel()
        lv = np.asarray(self.levels, dtype=float).ravel()
        if m.shape != lv.shape:
            raise ValueError("masses and levels must be aligned")
        if np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise ValueError("masses must be finite and positive")
        if np.any(~np.isfinite(lv)):
            raise ValueError("levels must be finite")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[float, float]]) -> "StepFunctionOnMeasure":
        pieces = list(pieces)
        return cls(np.array([p[0] for p in pieces], dtype=float),
                   np.array([p[1] for p in pieces], dtype=float))

    @classmethod
    def zero(cls) -> "StepFunctionOnMeasure":
        return cls(np.zeros(0), np.zeros(0))

    def positive_part(self) -> "StepFunctionOnMeasure":
        keep = self.levels > 0
        return StepFunctionOnMeasure(self.masses[keep], self.levels[keep])

    def negative_part(self) -> "StepFunctionOnMeasure":
        keep = self.levels < 0
        return StepFunctionOnMeasure(self.masses[keep], -self.levels[keep])


def choquet_measure(u: StepFunctionOnMeasure, D: MeasureMap | Callable) -> float:
    """``int_0^inf D(mass(u > x)) dx`` for a nonnegative step function."""
    if np.any(u.levels < 0):
        raise ValueError("choquet_measure needs nonnegative levels")
    if u.levels.size == 0:
        return 0.0
    order = np.argsort(-u.levels, kind="stable")
    lv = u.levels[order]
    cum = np.cumsum(u.masses[order])
    nxt = np.append(lv[1:], 0.0)
    dm = np.asarray(D(cum), dtype=float)
    return float(np.dot(lv - nxt, dm))


@dataclass(frozen=True)
class MaximizingDensity:
    values: np.ndarray
    probs: np.ndarray
    weights: np.ndarray

    def measure(self) -> np.ndarray:
        return self.weights * self.probs

    def expectation(self) -> float:
        return float(np.dot(self.measure(), self.values))


def maximizing_density(dist: DiscreteDistribution, psi: ProbabilityDistortion) -> MaximizingDensity:
    """Density of the comonotone maximizer with respect to the base law."""
    p_desc = dist.probs[::-1]
    q_desc = comonotone_weights(p_desc, psi)
    phi = (q_desc / p_desc)[::-1]
    return MaximizingDensity(dist.values, dist.probs, phi)


def subset_masks(n: int) -> np.ndarray:
    """All ``2**n`` subsets of ``n`` atoms as a boolean matrix."""
    idx = np.arange(2 ** n)[:, None]
    return ((idx >> np.arange(n)[None, :]) & 1).astype(bool)


def feasibility_slack(q: np.ndarray, dist: DiscreteDistribution,
                      psi: ProbabilityDistortion, masks: np.ndarray | None = None) -> np.ndarray:
    """Minimum over subsets of ``psi(p(A)) - q(A)``; one entry per row of ``q``."""
    q = np.atleast_2d(q)
    if masks is None:
        masks = subset_masks(dist.n_atoms)
    mf = masks.astype(float)
    cap = psi.unchecked(np.clip(mf @ dist.probs, 0.0, 1.0))
    return np.min(cap[None, :] - q @ mf.T, axis=1)


@dataclass(frozen=True)
class BruteforceResult:
    value: float
    samples: np.ndarray
    comonotone_value: float


def bruteforce_search(dist: DiscreteDistribution, psi: ProbabilityDistortion,
                      trials: int = 10_000, seed: int = 0) -> BruteforceResult:
    """Sample feasible measures and record their expectations.

    Each random Dirichlet vector ``r`` is pulled toward the comonotone
    maximizer ``q*`` along the segment ``t r + (1 - t) q*``; ``t`` is the
    largest value keeping every subset constraint, found in closed form and
    then halved while rounding still leaves a violated constraint.
    """
    n = dist.n_atoms
    if n > MAX_BRUTEFORCE_ATOMS:
        raise ValueError(f"bruteforce oracle supports at most {MAX_BRUTEFORCE_ATOMS} atoms")
    mf = subset_masks(n).astype(float)
    cap = psi.unchecked(np.clip(mf @ dist.probs, 0.0, 1.0))
    q_star = maximizing_density(dist, psi).measure()
    slack_star = np.maximum(cap - mf @ q_star, 0.0)
    # q* may itself violate a constraint by rounding; never demand more than it meets
    floor = min(0.0, float(np.min(cap - mf @ q_star)))
    rng = np.random.default_rng(seed)
    raw = rng.dirichlet(np.ones(n), size=trials) if trials > 0 else np.zeros((0, n))
    excess = raw @ mf.T - (mf @ q_star)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(excess > 0, slack_star[None, :] / excess, np.inf)
    t = np.minimum(1.0, ratio.min(axis=1)) if trials > 0 else np.zeros(0)
    q = t[:, None] * raw + (1.0 - t[:, None]) * q_star
    for _ in range(60):
        bad = np.min(cap[None, :] - q @ mf.T, axis=1) < floor
        if not bad.any():
            break
        t[bad] *= 0.5
        q[bad] = t[bad, None] * raw[bad] + (1.0 - t[bad, None]) * q_star
    else:
        q[bad] = q_star
    samples = np.concatenate([[float(q_star @ dist.values)], q @ dist.values])
    return BruteforceResult(float(samples.max()), samples, float(samples[0]))


def bruteforce_sup(dist: DiscreteDistribution, psi: ProbabilityDistortion,
                   trials: int = 10_000, seed: int = 0) -> float:
    """Largest expectation over sampled feasible measures."""
    return bruteforce_search(dist, psi, trials, seed).value


def driver_g(h: float, u: StepFunctionOnMeasure, delta: DriftShift,
             gamma: JumpRateDistortion, sigma2: float) -> float:
    """Driver of the limiting nonlinear expectation at ``(h, u)``."""
    if not isinstance(gamma, JumpRateDistortion):
        raise ValueError("gamma must be a JumpRateDistortion")
    val = max(h, 0.0) * delta.plus * sigma2 + max(-h, 0.0) * delta.minus * sigma2
    val += choquet_measure(u.positive_part(), gamma.upper.gap())
    val += choquet_measure(u.negative_part(), gamma.lower.gap())
    return float(val)


__all__ = [
    "BruteforceResult", "DiscreteDistribution", "InvalidDistribution",
    "MaximizingDensity", "StepFunctionOnMeasure", "bruteforce_search",
    "bruteforce_sup", "choquet_measure", "choquet_probability", "choquet_rows",
    "comonotone_weights", "driver_g", "feasibility_slack", "maximizing_density",
    "subset_masks",
]
