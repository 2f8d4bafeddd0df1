"""Coupling of two finite-activity subordinators on one Poisson clock.

Both processes jump at the arrivals of a Poisson process with rate ``C``,
the larger of the two total masses.  At each arrival one uniform ``U`` is
drawn and process ``i`` jumps by ``F_i^{-1}(U)``, where ``F_i`` puts mass
``1 - m_i / C`` at zero and follows ``1 - tail_i(x)/C`` above it.  If the
tails are ordered, so are the inverse maps, and hence the paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

BISECT_TOL = 1e-12


class DominationError(ValueError):
    pass


class SubordinatorSpec:
    """Finite jump measure on ``(0, inf)`` given by its tail."""

    mass: float

    def tail(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse_tail(self, y: np.ndarray) -> np.ndarray:
        """Smallest ``x`` with ``tail(x) <= y`` for ``0 < y <= mass``."""
        raise NotImplementedError

    def moment(self, k: int) -> float:
        """``int x^k nu(dx)``."""
        raise NotImplementedError


@dataclass(frozen=True)
class ScaledExponential(SubordinatorSpec):
    """Tail ``mass * exp(-rate x)``."""

    rate: float
    mass: float

    def __post_init__(self):
        if not self.rate > 0 or self.mass < 0:
            raise ValueError("need rate > 0 and mass >= 0")

    def tail(self, x):
        return self.mass * np.exp(-self.rate * np.asarray(x, dtype=float))

    def inverse_tail(self, y):
        y = np.asarray(y, dtype=float)
        return np.log(self.mass / y) / self.rate

    def moment(self, k):
        return self.mass * math.factorial(k) / self.rate ** k


@dataclass(frozen=True)
class TabulatedSubordinator(SubordinatorSpec):
    """Tail given at nodes ``xs`` (starting at 0), linear in between, zero
    beyond the last node."""

    xs: tuple[float, ...]
    tails: tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ts = np.asarray(self.tails, dtype=float)
        if xs.size < 2 or xs[0] != 0 or np.any(np.diff(xs) <= 0):
            raise ValueError("tabulated tail needs an increasing grid starting at 0")
        if ts.shape != xs.shape or np.any(ts < 0) or np.any(np.diff(ts) > 0):
            raise ValueError("tabulated tail must be nonnegative and nonincreasing")
        object.__setattr__(self, "xs", tuple(map(float, xs)))
        object.__setattr__(self, "tails", tuple(map(float, ts)))

    @property
    def mass(self) -> float:
        return self.tails[0]

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > self.xs[-1], 0.0, np.interp(x, self.xs, self.tails))

    def inverse_tail(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lo = np.zeros_like(y)
        hi = np.full_like(y, self.xs[-1])
        while np.any(hi - lo > BISECT_TOL):
            mid = 0.5 * (lo + hi)
            above = self.tail(mid) > y
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return hi

    def moment(self, k):
        f = lambda x: k * x ** (k - 1) * float(self.tail(x))
        val, _ = integrate.quad(f, 0.0, self.xs[-1], points=self.xs[1:-1][:100], limit=500)
        return val


def inverse_cdf(nu: SubordinatorSpec, C: float, u: np.ndarray) -> np.ndarray:
    """Jump size for uniforms ``u`` on a clock of rate ``C``."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    if nu.mass <= 0:
        return out
    jump = u >= 1.0 - nu.mass / C
    if np.any(jump):
        y = np.minimum(C * (1.0 - u[jump]), nu.mass)
        out[jump] = np.maximum(nu.inverse_tail(y), 0.0)
    return out


def check_domination(nu1: SubordinatorSpec, nu2: SubordinatorSpec, x_max: float = 50.0,
                     n: int = 4001) -> bool:
    x = np.concatenate([[0.0], np.geomspace(1e-8, x_max, n)])
    return bool(np.all(nu1.tail(x) >= nu2.tail(x) - 1e-15))


@dataclass(frozen=True)
class CoupledPaths:
    z1: np.ndarray
    z2: np.ndarray
    dominated: np.ndarray
    jump_counts: np.ndarray
    T: float

    @property
    def n_paths(self) -> int:
        return int(self.z1.size)

    def domination_rate(self) -> float:
        return float(self.dominated.mean())


def couple_subordinators(nu1: SubordinatorSpec, nu2: SubordinatorSpec, T: float,
                         n_paths: int, seed: int) -> CoupledPaths:
    """Simulate ``n_paths`` coupled pairs; path ``i`` uses the stream ``(seed, i)``."""
    if not check_domination(nu1, nu2):
        raise DominationError("tail of the first measure must dominate the second")
    C = max(nu1.mass, nu2.mass)
    z1 = np.zeros(n_paths)
    z2 = np.zeros(n_paths)
    dom = np.ones(n_paths, dtype=bool)
    counts = np.zeros(n_paths, dtype=np.int64)
    if C <= 0:
        return CoupledPaths(z1, z2, dom, counts, T)
    for i in range(n_paths):
        rng = np.random.default_rng([seed, i])
        k = rng.poisson(C * T)
        counts[i] = k
        if k == 0:
            continue
        # arrival times are irrelevant for the terminal values and the running order
        u = rng.random(k)
        j1 = inverse_cdf(nu1, C, u)
        j2 = inverse_cdf(nu2, C, u)
        p1 = np.cumsum(j1)
        p2 = np.cumsum(j2)
        z1[i] = p1[-1]
        z2[i] = p2[-1]
        dom[i] = bool(np.all(p1 >= p2))
    return CoupledPaths(z1, z2, dom, counts, T)


@dataclass(frozen=True)
class MarginalReport:
    mean: float
    mean_target: float
    mean_z: float
    var: float
    var_target: float
    var_z: float

    @property
    def passed(self) -> bool:
        return abs(self.mean_z) <= 3.0 and abs(self.var_z) <= 3.0


def marginal_check(paths: CoupledPaths, nu: SubordinatorSpec, which: int = 1) -> MarginalReport:
    """z-scores of the sample mean and variance of ``Z^which_T``."""
    z = paths.z1 if which == 1 else paths.z2
    n = z.size
    T = paths.T
    k1, k2, k4 = T * nu.moment(1), T * nu.moment(2), T * nu.moment(4)
    mean = float(z.mean())
    var = float(z.var(ddof=1))
    se_mean = math.sqrt(k2 / n) if k2 > 0 else 0.0
    se_var = math.sqrt((k4 + 2.0 * k2 * k2) / n) if k2 > 0 else 0.0
    mz = (mean - k1) / se_mean if se_mean > 0 else (0.0 if mean == k1 else math.inf)
    vz = (var - k2) / se_var if se_var > 0 else (0.0 if var == k2 else math.inf)
    return MarginalReport(mean, k1, mz, var, k2, vz)


def subordinator_from_config(cfg: dict) -> SubordinatorSpec:
    if cfg["type"] == "exponential":
        return ScaledExponential(float(cfg["rate"]), float(cfg["mass"]))
    if cfg["type"] == "tabulated":
        return TabulatedSubordinator(tuple(cfg["xs"]), tuple(cfg["tails"]))
    raise ValueError(f"unknown subordinator type {cfg['type']!r}")


__all__ = [
    "CoupledPaths", "DominationError", "MarginalReport", "ScaledExponential",
    "SubordinatorSpec", "TabulatedSubordinator", "check_domination", "couple_subordinators",
    "inverse_cdf", "marginal_check", "subordinator_from_config",
]
