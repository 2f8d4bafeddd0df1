"""Reference values for a geometric Brownian motion under a drift shift."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special


def normal_cdf(x):
    """Standard normal distribution function."""
    out = special.ndtr(x)
    return float(out) if np.ndim(x) == 0 else out


def normal_sf(x):
    return normal_cdf(-np.asarray(x)) if np.ndim(x) else normal_cdf(-x)


@dataclass(frozen=True)
class GbmSpec:
    S0: float
    mu: float
    sigma: float
    T: float
    delta_plus: float = 0.0

    def __post_init__(self):
        if not (self.S0 > 0 and self.sigma > 0 and self.T > 0):
            raise ValueError("GBM spec needs S0, sigma, T > 0")

    @property
    def c_sharp(self) -> float:
        """Growth rate under the tilted measure."""
        return self.delta_plus * self.sigma ** 2 + self.mu


def gbm_call(spec: GbmSpec, K: float) -> float:
    if not K > 0:
        raise ValueError("strike must be positive")
    c = spec.c_sharp
    a = c + 0.5 * spec.sigma ** 2
    vol = spec.sigma * math.sqrt(spec.T)
    d_plus = (math.log(spec.S0 / K) + a * spec.T) / vol
    d_minus = d_plus - vol
    return spec.S0 * math.exp(c * spec.T) * normal_cdf(d_plus) - K * normal_cdf(d_minus)


def gbm_call_quadrature(spec: GbmSpec, K: float) -> float:
    """Call value by direct integration of the lognormal payoff."""
    c = spec.c_sharp
    m = (c - 0.5 * spec.sigma ** 2) * spec.T
    s = spec.sigma * math.sqrt(spec.T)
    z0 = (math.log(K / spec.S0) - m) / s
    f = lambda z: (spec.S0 * math.exp(m + s * z) - K) * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    val, _ = integrate.quad(f, z0, max(z0, 0.0) + 40.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def gbm_upin_digital_reflection(spec: GbmSpec, H: float) -> float:
    """Probability that ``S`` reaches ``H > S0`` before ``T`` (continuous monitoring)."""
    if not H >= spec.S0:
        raise ValueError("barrier must lie above spot")
    b = math.log(H / spec.S0)
    if b == 0.0:
        return 1.0
    nu = spec.c_sharp - 0.5 * spec.sigma ** 2
    vol = spec.sigma * math.sqrt(spec.T)
    first = normal_cdf(-(b - nu * spec.T) / vol)
    expo = 2.0 * nu * b / spec.sigma ** 2
    second_tail = normal_cdf(-(b + nu * spec.T) / vol)
    second = math.exp(expo) * second_tail if second_tail > 0 else 0.0
    return min(1.0, first + second)


def gbm_upin_digital_alternative(spec: GbmSpec, H: float) -> float:
    """Alternative form ``(H/S0)^{2a} sf(e_+) + sf(e_-)``, with
    ``a = c# + sigma^2/2``, ``e_+ = (log(H/S0) + aT)/(sigma sqrt T)`` and
    ``e_- = e_+ - 2 a sqrt(T)/sigma``.  For comparison only."""
    if not H > spec.S0:
        raise ValueError("barrier must lie above spot")
    a = spec.c_sharp + 0.5 * spec.sigma ** 2
    vol = spec.sigma * math.sqrt(spec.T)
    e_plus = (math.log(H / spec.S0) + a * spec.T) / vol
    e_minus = e_plus - 2.0 * a * math.sqrt(spec.T) / spec.sigma
    lead = normal_cdf(-e_plus)
    term = (H / spec.S0) ** (2.0 * a) * lead if lead > 0 else 0.0
    return term + normal_cdf(-e_minus)


def gbm_monte_carlo_call(spec: GbmSpec, K: float, n_paths: int, seed: int = 0) -> tuple[float, float]:
    """Mean and standard error of the discounted-free call payoff."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n_paths)
    s = spec.S0 * np.exp((spec.c_sharp - 0.5 * spec.sigma ** 2) * spec.T + spec.sigma * math.sqrt(spec.T) * z)
    pay = np.maximum(s - K, 0.0)
    return float(pay.mean()), float(pay.std(ddof=1) / math.sqrt(n_paths))


def gbm_monte_carlo_upin(spec: GbmSpec, H: float, n_paths: int, n_steps: int,
                         seed: int = 0, chunk: int = 50_000) -> tuple[float, float]:
    """Discretely monitored hit probability by simulation (mean, standard error)."""
    rng = np.random.default_rng(seed)
    b = math.log(H / spec.S0)
    dt = spec.T / n_steps
    drift = (spec.c_sharp - 0.5 * spec.sigma ** 2) * dt
    vol = spec.sigma * math.sqrt(dt)
    hits = 0
    done = 0
    while done < n_paths:
        m = min(chunk, n_paths - done)
        x = np.zeros(m)
        hit = np.zeros(m, dtype=bool)
        for _ in range(n_steps):
            x += drift + vol * rng.standard_normal(m)
            hit |= x >= b
        hits += int(hit.sum())
        done += m
    p = hits / n_paths
    return p, math.sqrt(p * (1 - p) / n_paths)


__all__ = [
    "GbmSpec", "gbm_call", "gbm_call_quadrature", "gbm_monte_carlo_call", "gbm_monte_carlo_upin",
    "gbm_upin_digital_alternative", "gbm_upin_digital_reflection", "normal_cdf", "normal_sf",
]
