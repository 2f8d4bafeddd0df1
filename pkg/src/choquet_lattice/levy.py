"""Lévy models: triplet ``(d, sigma^2, jump measure)`` and the tilted model.

``d`` is the mean of ``X_1``, so the lattice can match the first moment
directly.  Jump measures are described by their tail functions

    tail_plus(x)  = Lambda((x, inf)),     tail_minus(x) = Lambda((-inf, -x)),

for ``x > 0``.  Interval masses are always formed from tail differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .distortion import (IdentityRate, JumpRateDistortion, PowerShift)

QUAD_OPTS = dict(limit=400, epsabs=1e-14, epsrel=1e-12)


class ModelError(ValueError):
    """Invalid or infeasible model specification."""


def _pos(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("tail functions are queried at x > 0 only")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


class JumpMeasure:
    """Tail-function interface; subclasses implement ``_plus``/``_minus``."""

    def _plus(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _minus(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tail_plus(self, x):
        return _out(self._plus(_pos(x)), x)

    def tail_minus(self, x):
        return _out(self._minus(_pos(x)), x)

    def is_zero(self) -> bool:
        return False

    # second moment on one side, over (lo, hi) with 0 <= lo < hi <= inf
    def _side_sigma2(self, side: str, lo: float, hi: float) -> float:
        tail = self._plus if side == "plus" else self._minus

        def t(x):
            return float(tail(np.array([x]))[0])

        boundary = (lo * lo * t(lo) if lo > 0 else 0.0) - (hi * hi * t(hi) if math.isfinite(hi) else 0.0)
        f = lambda x: 2.0 * x * t(x) if x > 0 else 0.0
        pts = [p for p in (1e-6, 1e-3, 0.1, 1.0) if lo < p < hi]
        edges = [lo, *pts, hi]
        total = 0.0
        for a, b in zip(edges, edges[1:]):
            val, _ = integrate.quad(f, a, b, **QUAD_OPTS)
            total += val
        return boundary + total

    def sigma2_side(self, side: str, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        return self._side_sigma2(side, lo, hi)

    def sigma2_total(self) -> float:
        return self.sigma2_side("plus", 0.0, math.inf) + self.sigma2_side("minus", 0.0, math.inf)

    def sigma2_interval(self, a: float, b: float) -> float:
        """``int_(a, b) x^2 Lambda(dx)``."""
        if not a < b:
            raise ValueError("sigma2_interval needs a < b")
        total = 0.0
        if b > 0:
            total += self.sigma2_side("plus", max(a, 0.0), b)
        if a < 0:
            total += self.sigma2_side("minus", max(-b, 0.0), -a)
        return total

    def tail_integral(self, side: str) -> float:
        """``int_0^inf tail(x) dx`` (first absolute moment of one side)."""
        tail = self._plus if side == "plus" else self._minus
        f = lambda x: float(tail(np.array([x]))[0]) if x > 0 else 0.0
        a, _ = integrate.quad(f, 0.0, 1.0, **QUAD_OPTS)
        b, _ = integrate.quad(f, 1.0, math.inf, **QUAD_OPTS)
        return a + b

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class NoJumps(JumpMeasure):
    def _plus(self, x):
        return np.zeros_like(x)

    def _minus(self, x):
        return np.zeros_like(x)

    def is_zero(self):
        return True

    def sigma2_side(self, side, lo, hi):
        return 0.0

    def tail_integral(self, side):
        return 0.0

    def to_config(self):
        return {"type": "none"}


@dataclass(frozen=True)
class TailCGMY(JumpMeasure):
    """Tails ``C e^{-Mx} x^{-Y}`` (right) and ``C e^{-G x} x^{-Y}`` (left).

    Parameters
    ----------
    C, G, M : float
        Scale and the two exponential dampings; ``G > 0`` keeps the left
        second moment finite.
    Y : float
        Power in ``(0, 1]``.
    """

    C: float
    G: float
    M: float
    Y: float

    def __post_init__(self):
        if not self.C > 0:
            raise ModelError("TailCGMY requires C > 0")
        if not self.G > 0:
            raise ModelError("TailCGMY requires G > 0 for a finite second moment")
        if not self.M > 1:
            raise ModelError("TailCGMY requires M > 1")
        if not 0 < self.Y <= 1:
            raise ModelError("TailCGMY requires 0 < Y <= 1")

    def _plus(self, x):
        return self.C * np.exp(-self.M * x) * np.power(x, -self.Y)

    def _minus(self, x):
        return self.C * np.exp(-self.G * x) * np.power(x, -self.Y)

    def density_plus(self, x):
        x = np.asarray(x, dtype=float)
        return self.C * (self.Y + self.M * x) * np.power(x, -1.0 - self.Y) * np.exp(-self.M * x)

    def density_minus(self, x):
        x = np.asarray(x, dtype=float)
        return self.C * (self.Y + self.G * x) * np.power(x, -1.0 - self.Y) * np.exp(-self.G * x)

    def sigma2_closed_form(self) -> float:
        return 2.0 * self.C * special.gamma(2.0 - self.Y) * (
            self.M ** (self.Y - 2.0) + self.G ** (self.Y - 2.0))

    def sigma2_total(self):
        return self.sigma2_closed_form()

    def _side_sigma2(self, side, lo, hi):
        rate = self.M if side == "plus" else self.G
        # x^2 times the density, written to avoid x^(-1-Y) overflowing near 0
        f = lambda x: (self.C * (self.Y + rate * x) * x ** (1.0 - self.Y) * math.exp(-rate * x)
                       if x > 0 else 0.0)
        pts = [p for p in (1e-6, 1e-3, 0.1, 1.0) if lo < p < hi]
        edges = [lo, *pts, hi]
        total = 0.0
        for a, b in zip(edges, edges[1:]):
            val, _ = integrate.quad(f, a, b, **QUAD_OPTS)
            total += val
        return total

    def tail_integral(self, side):
        if self.Y >= 1:
            return math.inf
        rate = self.M if side == "plus" else self.G
        return self.C * special.gamma(1.0 - self.Y) * rate ** (self.Y - 1.0)

    def to_config(self):
        return {"type": "tailcgmy", "C": self.C, "G": self.G, "M": self.M, "Y": self.Y}


@dataclass(frozen=True)
class TabulatedTails(JumpMeasure):
    """Tails given on a grid; linear interpolation of ``log tail`` in ``x``.

    Below the first node the tail follows the power law through the first two
    nodes.  Beyond the last node the tail is zero, which places the remaining
    mass as an atom at the last node.  ``sigma2`` optionally overrides the
    quadrature value of the total second moment.
    """

    xs: tuple[float, ...]
    plus: tuple[float, ...]
    minus: tuple[float, ...]
    sigma2: float | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.size < 2 or xs[0] <= 0 or np.any(np.diff(xs) <= 0):
            raise ModelError("tabulated tails need an increasing positive grid of >= 2 nodes")
        for name in ("plus", "minus"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != xs.shape or np.any(v <= 0) or np.any(np.diff(v) > 0):
                raise ModelError(f"tabulated {name} tail must be positive and nonincreasing")
        object.__setattr__(self, "xs", tuple(map(float, self.xs)))
        object.__setattr__(self, "plus", tuple(map(float, self.plus)))
        object.__setattr__(self, "minus", tuple(map(float, self.minus)))

    def _interp(self, x, vals):
        xs = np.asarray(self.xs)
        lv = np.log(np.asarray(vals))
        out = np.exp(np.interp(x, xs, lv))
        slope = (lv[1] - lv[0]) / (math.log(xs[1]) - math.log(xs[0]))
        with np.errstate(divide="ignore"):
            below = np.exp(lv[0] + slope * (np.log(x) - math.log(xs[0])))
        out = np.where(x < xs[0], below, out)
        return np.where(x > xs[-1], 0.0, out)

    def _plus(self, x):
        return self._interp(x, self.plus)

    def _minus(self, x):
        return self._interp(x, self.minus)

    def extrapolated(self, x) -> np.ndarray:
        """Flags for query points outside the tabulated range."""
        x = np.asarray(x, dtype=float)
        return (x < self.xs[0]) | (x > self.xs[-1])

    def sigma2_total(self):
        if self.sigma2 is not None:
            return float(self.sigma2)
        return super().sigma2_total()

    def _side_sigma2(self, side, lo, hi):
        hi = min(hi, self.xs[-1] * (1 + 1e-15))
        if hi <= lo:
            return 0.0
        return super()._side_sigma2(side, lo, hi)

    def to_config(self):
        cfg = {"type": "tabulated", "xs": list(self.xs), "plus": list(self.plus),
               "minus": list(self.minus)}
        if self.sigma2 is not None:
            cfg["sigma2_jumps"] = self.sigma2
        return cfg


@dataclass(frozen=True)
class TiltedJumps(JumpMeasure):
    """Tails ``Gamma_+(tail_plus)`` and ``Gamma_-(tail_minus)`` of a base measure."""

    base: JumpMeasure
    gamma: JumpRateDistortion

    def _plus(self, x):
        return self.gamma.upper.unchecked(self.base._plus(x))

    def _minus(self, x):
        return self.gamma.lower.unchecked(self.base._minus(x))

    def excess_plus(self, x):
        """``tail#_plus - tail_plus``, evaluated without cancellation."""
        x = _pos(x)
        return _out(self.gamma.upper.gap()._apply(self.base._plus(x)), x)

    def deficit_minus(self, x):
        """``tail_minus - tail#_minus``."""
        x = _pos(x)
        return _out(self.gamma.lower.gap()._apply(self.base._minus(x)), x)

    def _excess_side_integral(self, side: str, power: int) -> float:
        # int_0^inf x^power * |gap(tail(x))| dx
        if side == "plus":
            gap = self.gamma.upper.gap()
            tail = self.base._plus
        else:
            gap = self.gamma.lower.gap()
            tail = self.base._minus
        f = lambda x: (x ** power) * float(gap._apply(tail(np.array([x])))[0]) if x > 0 else 0.0
        total = 0.0
        for a, b in ((0.0, 1e-6), (1e-6, 1e-3), (1e-3, 0.1), (0.1, 1.0), (1.0, math.inf)):
            val, _ = integrate.quad(f, a, b, **QUAD_OPTS)
            total += val
        return total

    def _cgmy_power_excess(self) -> tuple[float, float, float] | None:
        if isinstance(self.base, TailCGMY) and isinstance(self.gamma.upper, PowerShift):
            g = self.gamma.upper.gamma
            b = self.base
            return g * b.C ** (1.0 / (1.0 + g)), b.M / (1.0 + g), b.Y / (1.0 + g)
        return None

    def excess_mean(self) -> float:
        """Mean added by the tilt: ``int (tail#_+ - tail_+) + int (tail_- - tail#_-)``."""
        cf = self._cgmy_power_excess()
        if cf is not None:
            c, m, y = cf
            up = c * special.gamma(1.0 - y) * m ** (y - 1.0)
        elif isinstance(self.gamma.upper, IdentityRate):
            up = 0.0
        else:
            up = self._excess_side_integral("plus", 0)
        down = 0.0 if isinstance(self.gamma.lower, IdentityRate) else self._excess_side_integral("minus", 0)
        return up + down

    def sigma2_total(self):
        base = self.base.sigma2_total()
        cf = self._cgmy_power_excess()
        if cf is not None:
            c, m, y = cf
            up = 2.0 * c * special.gamma(2.0 - y) * m ** (y - 2.0)
        elif isinstance(self.gamma.upper, IdentityRate):
            up = 0.0
        else:
            up = 2.0 * self._excess_side_integral("plus", 1)
        down = 0.0 if isinstance(self.gamma.lower, IdentityRate) else 2.0 * self._excess_side_integral("minus", 1)
        return base + up - down

    def to_config(self):
        return {"type": "tilted", "base": self.base.to_config()}


@dataclass(frozen=True)
class LevyModel:
    """Lévy triplet with the mean ``drift`` of ``X_1``.

    ``q`` is the exponential-moment order required of the right tail.
    """

    drift: float
    sigma2: float
    jumps: JumpMeasure = field(default_factory=NoJumps)
    q: float = 1.0

    def __post_init__(self):
        if not self.sigma2 >= 0 or not math.isfinite(self.sigma2):
            raise ModelError("sigma^2 must be finite and nonnegative")
        if not math.isfinite(self.drift):
            raise ModelError("drift must be finite")
        if isinstance(self.jumps, TailCGMY) and not self.jumps.M > 2.0 * self.q:
            raise ModelError(
                f"exponential moment of order {2 * self.q:g} fails: need M > 2q "
                f"(M={self.jumps.M:g}, q={self.q:g})")
        if self.sigma2 == 0 and self.jumps.is_zero():
            raise ModelError("degenerate model: no diffusion and no jumps")

    @classmethod
    def gbm(cls, mu: float, sigma: float) -> "LevyModel":
        """Log-price model of a GBM with growth rate ``mu``."""
        return cls(mu - 0.5 * sigma * sigma, sigma * sigma)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def tail_plus(self, x):
        return self.jumps.tail_plus(x)

    def tail_minus(self, x):
        return self.jumps.tail_minus(x)

    def sigma2_interval(self, a: float, b: float) -> float:
        return self.jumps.sigma2_interval(a, b)

    def sigma2_total(self) -> float:
        return self.jumps.sigma2_total()

    def variance_rate(self) -> float:
        return self.sigma2 + self.sigma2_total()

    def has_jumps(self) -> bool:
        return not self.jumps.is_zero()

    def to_config(self) -> dict:
        """Configuration accepted by :func:`model_from_config`."""
        if not self.has_jumps():
            return {"type": "gbm", "mu": self.drift + 0.5 * self.sigma2, "sigma": self.sigma}
        cfg = dict(self.jumps.to_config())
        cfg.update(sigma=self.sigma, drift=self.drift, q=self.q)
        return cfg


def tail_plus(m: LevyModel, x):
    return m.tail_plus(x)


def tail_minus(m: LevyModel, x):
    return m.tail_minus(x)


def sigma2_interval(m: LevyModel, a: float, b: float) -> float:
    return m.sigma2_interval(a, b)


@dataclass(frozen=True)
class QSharpModel:
    """Tilted model: drift raised by ``sigma^2 Delta_+`` and by the jump tilt,
    tails ``Gamma_+(tail_plus)`` and ``Gamma_-(tail_minus)``."""

    base: LevyModel
    delta_plus: float
    gamma: JumpRateDistortion
    model: LevyModel

    @property
    def drift_shift(self) -> float:
        return self.model.drift - self.base.drift


def tilt_qsharp(m: LevyModel, delta_plus: float, gamma: JumpRateDistortion | None = None) -> QSharpModel:
    if gamma is None:
        gamma = JumpRateDistortion()
    if not isinstance(gamma, JumpRateDistortion):
        raise ModelError("gamma must be a JumpRateDistortion")
    if delta_plus < 0:
        raise ModelError("drift shift must be nonnegative")
    if gamma.is_identity() or m.jumps.is_zero():
        jumps = m.jumps
        jump_mean = 0.0
    else:
        jumps = TiltedJumps(m.jumps, gamma)
        jump_mean = jumps.excess_mean()
    drift = m.drift + m.sigma2 * delta_plus + jump_mean
    tilted = LevyModel(drift, m.sigma2, jumps, q=0.0)
    return QSharpModel(m, delta_plus, gamma, tilted)


# ---------------------------------------------------------------------------
# Tail-CGMY tilt formulas
# ---------------------------------------------------------------------------


def cgmy_tilted_tail(C: float, M: float, Y: float, gamma: float, x):
    """Right tail after the power-shift tilt, written out in closed form."""
    x = _pos(x)
    g1 = 1.0 + gamma
    out = C * np.exp(-M * x) * x ** -Y + gamma * C ** (1.0 / g1) * np.exp(-M * x / g1) * x ** (-Y / g1)
    return _out(out, x)


def cgmy_csharp_kernel(M: float, Y: float, gamma: float) -> float:
    """``Gamma(u) (M/(1+gamma))^(-u)`` with ``u = (1+gamma-Y)/(1+gamma)``.

    This equals ``int_0^inf e^{-Mx/(1+gamma)} x^{-Y/(1+gamma)} dx``.  The mean
    added by the tilt carries the extra factor ``gamma C^(1/(1+gamma))``; see
    :func:`cgmy_csharp`.
    """
    u = (1.0 + gamma - Y) / (1.0 + gamma)
    return special.gamma(u) * (M / (1.0 + gamma)) ** (-u)


def cgmy_csharp(C: float, M: float, Y: float, gamma: float) -> float:
    """Mean added to a Tail-CGMY model by the power-shift tilt."""
    return gamma * C ** (1.0 / (1.0 + gamma)) * cgmy_csharp_kernel(M, Y, gamma)


def model_from_config(cfg: dict) -> LevyModel:
    kind = cfg["type"]
    if kind == "gbm":
        return LevyModel.gbm(float(cfg["mu"]), float(cfg["sigma"]))
    sigma = float(cfg.get("sigma", 0.0))
    q = float(cfg.get("q", 1.0))
    drift = float(cfg.get("drift", 0.0))
    if kind == "tailcgmy":
        jumps = TailCGMY(float(cfg["C"]), float(cfg["G"]), float(cfg["M"]), float(cfg["Y"]))
        return LevyModel(drift, sigma * sigma, jumps, q)
    if kind == "tabulated":
        jumps = TabulatedTails(tuple(cfg["xs"]), tuple(cfg["plus"]), tuple(cfg["minus"]),
                               cfg.get("sigma2_jumps"))
        return LevyModel(drift, sigma * sigma, jumps, q)
    raise ModelError(f"unknown model type {kind!r}")


__all__ = [
    "JumpMeasure", "LevyModel", "ModelError", "NoJumps", "QSharpModel", "TabulatedTails",
    "TailCGMY", "TiltedJumps", "cgmy_csharp", "cgmy_csharp_kernel", "cgmy_tilted_tail",
    "model_from_config", "sigma2_interval", "tail_minus", "tail_plus", "tilt_qsharp",
]
