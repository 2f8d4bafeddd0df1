"""Probability and measure distortions, scaling families and their limits.

A probability distortion is an increasing concave map of ``[0, 1]`` onto itself.
A measure distortion acts on masses in ``[0, inf)`` and is used for jump
intensities.  Scaling families are time-step indexed probability distortions
``psi(p, delta)`` whose small-step behaviour is summarised by a drift function
``xi`` and a pair of jump-rate maps ``(gamma_plus, gamma_minus)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

DOMAIN_TOL = 1e-12
CHECK_TOL = 1e-12
GRID_POINTS = 1025
RANDOM_POINTS = 1000


class DomainError(ValueError):
    """Raised when a probability argument lies outside ``[0, 1]``."""


class NonConvergence(RuntimeError):
    """Raised when a small-step limit cannot be extrapolated reliably."""


def _as_prob(p, tol: float = DOMAIN_TOL) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -tol) or np.any(arr > 1.0 + tol):
        raise DomainError(f"probability argument outside [0, 1]: {p!r}")
    return np.clip(arr, 0.0, 1.0)


def _scalar_or_array(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


# ---------------------------------------------------------------------------
# probability distortions
# ---------------------------------------------------------------------------


class ProbabilityDistortion:
    """Base class; subclasses implement ``_apply`` on clipped arrays."""

    name = "distortion"

    def _apply(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def small_p_exponent(self) -> float:
        """Exponent ``e`` with ``D(y) ~ c * y**e`` as ``y -> 0``."""
        return 1.0

    def __call__(self, p):
        arr = _as_prob(p)
        return _scalar_or_array(self._apply(arr), p)

    def unchecked(self, p: np.ndarray) -> np.ndarray:
        """Vectorised evaluation without domain checks (arguments are clipped)."""
        return self._apply(np.clip(p, 0.0, 1.0))

    def dual(self, p):
        arr = _as_prob(p)
        return _scalar_or_array(1.0 - self._apply(1.0 - arr), p)

    def dual_distortion(self) -> "DualDistortion":
        return DualDistortion(self)

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(ProbabilityDistortion):
    name = "linear"

    def _apply(self, p):
        return p

    def to_config(self):
        return {"family": "linear"}


@dataclass(frozen=True)
class MinMaxVar(ProbabilityDistortion):
    """``1 - (1 - p**(1/(1+gamma)))**(1+gamma)``."""

    gamma: float
    name = "minmaxvar"

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("MinMaxVar requires gamma >= 0")

    def _apply(self, p):
        g1 = 1.0 + self.gamma
        with np.errstate(divide="ignore"):
            t = np.power(p, 1.0 / g1)
            return -np.expm1(g1 * np.log1p(-t))

    def small_p_exponent(self):
        return 1.0 / (1.0 + self.gamma)

    def to_config(self):
        return {"family": "minmaxvar", "gamma": self.gamma}


@dataclass(frozen=True)
class Exponential(ProbabilityDistortion):
    """``(1 - exp(-alpha p)) / (1 - exp(-alpha))``."""

    alpha: float
    name = "exponential"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("Exponential requires alpha > 0")

    def _apply(self, p):
        return np.expm1(-self.alpha * p) / math.expm1(-self.alpha)

    def to_config(self):
        return {"family": "exponential", "alpha": self.alpha}


@dataclass(frozen=True)
class PiecewiseLinear(ProbabilityDistortion):
    """Concave interpolation through knots ``(x_i, y_i)`` from (0,0) to (1,1)."""

    knots: tuple[tuple[float, float], ...]
    name = "piecewise_linear"

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.knots)
        object.__setattr__(self, "knots", pts)
        xs = np.array([x for x, _ in pts])
        ys = np.array([y for _, y in pts])
        if len(pts) < 2 or xs[0] != 0.0 or ys[0] != 0.0 or xs[-1] != 1.0 or ys[-1] != 1.0:
            raise ValueError("knots must start at (0, 0) and end at (1, 1)")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        slopes = np.diff(ys) / np.diff(xs)
        if np.any(slopes < 0) or np.any(np.diff(slopes) > 1e-12):
            raise ValueError("knots must describe an increasing concave function")

    def _apply(self, p):
        xs = [x for x, _ in self.knots]
        ys = [y for _, y in self.knots]
        return np.interp(p, xs, ys)

    def to_config(self):
        return {"family": "piecewise_linear", "knots": [list(k) for k in self.knots]}


@dataclass(frozen=True)
class Composite(ProbabilityDistortion):
    """Convex combination ``sum_i w_i D_i``."""

    components: tuple[tuple[float, ProbabilityDistortion], ...]
    name = "composite"

    def __post_init__(self):
        comps = tuple((float(w), d) for w, d in self.components)
        object.__setattr__(self, "components", comps)
        weights = [w for w, _ in comps]
        if not comps or min(weights) < 0 or abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValueError("composite weights must be nonnegative and sum to 1")

    def _apply(self, p):
        out = np.zeros_like(p, dtype=float)
        for w, d in self.components:
            out = out + w * d._apply(p)
        return out

    def small_p_exponent(self):
        return min(d.small_p_exponent() for w, d in self.components if w > 0)

    def to_config(self):
        return {
            "family": "composite",
            "components": [{"weight": w, **d.to_config()} for w, d in self.components],
        }


@dataclass(frozen=True)
class DualDistortion(ProbabilityDistortion):
    """``1 - D(1 - p)``; convex when ``D`` is concave."""

    base: ProbabilityDistortion
    name = "dual"

    def _apply(self, p):
        return 1.0 - self.base._apply(1.0 - p)

    def dual_distortion(self):
        return self.base

    def small_p_exponent(self):
        return 1.0

    def to_config(self):
        return {"family": "dual", "base": self.base.to_config()}


def distortion_from_config(cfg: dict) -> ProbabilityDistortion:
    family = cfg.get("family")
    if family == "linear":
        return Linear()
    if family == "minmaxvar":
        return MinMaxVar(float(cfg["gamma"]))
    if family == "exponential":
        return Exponential(float(cfg["alpha"]))
    if family == "piecewise_linear":
        return PiecewiseLinear(tuple(tuple(k) for k in cfg["knots"]))
    if family == "composite":
        comps = []
        for c in cfg["components"]:
            c = dict(c)
            w = float(c.pop("weight"))
            comps.append((w, distortion_from_config(c)))
        return Composite(tuple(comps))
    raise ValueError(f"unknown distortion family {family!r}")


def eval(D: ProbabilityDistortion, p):  # noqa: A001 - mirrors the operation name
    """Evaluate ``D(p)``; raises :class:`DomainError` outside ``[0, 1]``."""
    return D(p)


def dual(D: ProbabilityDistortion, p):
    """Evaluate the dual distortion ``1 - D(1 - p)``."""
    return D.dual(p)


def check_distortion(D, n_random: int = RANDOM_POINTS, seed: int = 0,
                     tol: float = CHECK_TOL) -> dict[str, bool]:
    """Endpoint, monotonicity and midpoint-concavity checks on a fixed grid.

    ``D`` may be any callable on arrays in ``[0, 1]``.
    """
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    pts = np.sort(np.concatenate([grid, rng.random(n_random)]))
    f = np.asarray(D(pts), dtype=float)
    p = rng.random(n_random)
    q = rng.random(n_random)
    lo, hi = np.minimum(p, q), np.maximum(p, q)
    mid = np.asarray(D(0.5 * (lo + hi)), dtype=float)
    f_lo = np.asarray(D(lo), dtype=float)
    f_hi = np.asarray(D(hi), dtype=float)
    g_mid = np.asarray(D(0.5 * (grid[:-2] + grid[2:])), dtype=float)
    g = np.asarray(D(grid), dtype=float)
    return {
        "zero_at_zero": abs(float(D(np.array([0.0]))[0])) <= tol,
        "one_at_one": abs(float(D(np.array([1.0]))[0]) - 1.0) <= tol,
        "monotone": bool(np.all(np.diff(f) >= -tol) and np.all(f_hi >= f_lo - tol)),
        "concave": bool(np.all(mid >= 0.5 * (f_lo + f_hi) - tol)
                        and np.all(g_mid >= 0.5 * (g[:-2] + g[2:]) - tol)),
    }


# ---------------------------------------------------------------------------
# measure distortions (maps on [0, inf))
# ---------------------------------------------------------------------------


class MeasureMap:
    """Continuous nondecreasing map on ``[0, inf)`` with value 0 at 0.

    ``exponents()`` returns the power-law exponents at 0 and at infinity,
    which decide finiteness of ``int_0^inf D(y) y^(-3/2) dy``.
    """

    def __call__(self, y):
        arr = np.asarray(y, dtype=float)
        if np.any(arr < 0):
            raise DomainError("measure distortion argument must be nonnegative")
        return _scalar_or_array(self._apply(arr), y)

    def _apply(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exponents(self) -> tuple[float, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroMap(MeasureMap):
    def _apply(self, y):
        return np.zeros_like(y, dtype=float)

    def exponents(self):
        return (math.inf, -math.inf)


@dataclass(frozen=True)
class IdentityMap(MeasureMap):
    def _apply(self, y):
        return np.array(y, dtype=float)

    def exponents(self):
        return (1.0, 1.0)


@dataclass(frozen=True)
class CappedIdentity(MeasureMap):
    """``min(y, cap)``."""

    cap: float = 1.0

    def _apply(self, y):
        return np.minimum(y, self.cap)

    def exponents(self):
        return (1.0, 0.0)


@dataclass(frozen=True)
class PowerMap(MeasureMap):
    """``coef * y**exponent`` with ``0 < exponent <= 1``."""

    coef: float
    exponent: float

    def _apply(self, y):
        return self.coef * np.power(y, self.exponent)

    def exponents(self):
        if self.coef == 0:
            return ZeroMap().exponents()
        return (self.exponent, self.exponent)


@dataclass(frozen=True)
class ExpCapMap(MeasureMap):
    """``psi(1 - exp(-y))`` for a probability distortion ``psi``; bounded by 1."""

    psi: ProbabilityDistortion

    def _apply(self, y):
        return self.psi._apply(-np.expm1(-y))

    def exponents(self):
        return (self.psi.small_p_exponent(), 0.0)


@dataclass(frozen=True)
class TabulatedMap(MeasureMap):
    """Linear interpolation through ``(x_i, y_i)`` starting at (0, 0); linear
    extrapolation with the last slope."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(float(v) for v in self.xs))
        object.__setattr__(self, "ys", tuple(float(v) for v in self.ys))
        if self.xs[0] != 0.0 or self.ys[0] != 0.0:
            raise ValueError("tabulated measure distortion must start at (0, 0)")
        if np.any(np.diff(self.xs) <= 0) or np.any(np.diff(self.ys) < 0):
            raise ValueError("tabulated measure distortion must be nondecreasing")

    def _slope_tail(self) -> float:
        return (self.ys[-1] - self.ys[-2]) / (self.xs[-1] - self.xs[-2])

    def _apply(self, y):
        out = np.interp(y, self.xs, self.ys)
        beyond = y > self.xs[-1]
        return np.where(beyond, self.ys[-1] + self._slope_tail() * (y - self.xs[-1]), out)

    def exponents(self):
        return (1.0, 1.0 if self._slope_tail() > 0 else 0.0)


@dataclass(frozen=True)
class SumMap(MeasureMap):
    parts: tuple[MeasureMap, ...]

    def _apply(self, y):
        out = np.zeros_like(y, dtype=float)
        for part in self.parts:
            out = out + part._apply(y)
        return out

    def exponents(self):
        exps = [p.exponents() for p in self.parts]
        return (min(e[0] for e in exps), max(e[1] for e in exps))


# ---------------------------------------------------------------------------
# jump-rate distortions Gamma_+ / Gamma_-
# ---------------------------------------------------------------------------


class JumpRateMap:
    """One side of a jump-rate distortion.

    ``direction`` is ``"upper"`` (``Gamma_+ >= id``) or ``"lower"``
    (``Gamma_- <= id``).  ``gap()`` returns ``|Gamma - id|`` as a
    :class:`MeasureMap`.
    """

    direction: str = "upper"

    def gap(self) -> MeasureMap:
        raise NotImplementedError

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        g = self.gap()._apply(lam_arr)
        out = lam_arr + g if self.direction == "upper" else lam_arr - g
        return _scalar_or_array(out, lam)

    def unchecked(self, lam: np.ndarray) -> np.ndarray:
        g = self.gap()._apply(lam)
        return lam + g if self.direction == "upper" else lam - g


@dataclass(frozen=True)
class IdentityRate(JumpRateMap):
    direction: str = "upper"

    def gap(self):
        return ZeroMap()


@dataclass(frozen=True)
class PowerShift(JumpRateMap):
    """``lam + gamma * lam**(1/(1+gamma))``; always an upper map."""

    gamma: float
    direction: str = "upper"

    def __post_init__(self):
        if self.direction != "upper":
            raise ValueError("PowerShift is an upper jump-rate map")

    def gap(self):
        return PowerMap(self.gamma, 1.0 / (1.0 + self.gamma))


@dataclass(frozen=True)
class ExpCap(JumpRateMap):
    """``lam +/- psi(1 - exp(-lam))``."""

    psi: ProbabilityDistortion
    direction: str = "upper"

    def gap(self):
        return ExpCapMap(self.psi)


@dataclass(frozen=True)
class TabulatedRate(JumpRateMap):
    """Gap ``|Gamma - id|`` given as a table."""

    xs: tuple[float, ...]
    gaps: tuple[float, ...]
    direction: str = "upper"

    def gap(self):
        return TabulatedMap(self.xs, self.gaps)


@dataclass(frozen=True)
class DriftShift:
    plus: float = 0.0
    minus: float = 0.0

    def __post_init__(self):
        if self.plus < 0 or self.minus < 0:
            raise ValueError("drift shifts must be nonnegative")


@dataclass(frozen=True)
class JumpRateDistortion:
    upper: JumpRateMap = field(default_factory=IdentityRate)
    lower: JumpRateMap = field(default_factory=lambda: IdentityRate("lower"))

    def __post_init__(self):
        if self.upper.direction != "upper" or self.lower.direction != "lower":
            raise ValueError("jump-rate distortion needs an upper and a lower map")

    def is_identity(self) -> bool:
        return isinstance(self.upper, IdentityRate) and isinstance(self.lower, IdentityRate)


def check_jump_rate(gamma: JumpRateDistortion, lam_max: float = 50.0, n: int = 2001,
                    tol: float = CHECK_TOL) -> dict[str, bool]:
    lam = np.linspace(0.0, lam_max, n)
    up = gamma.upper.unchecked(lam)
    lo = gamma.lower.unchecked(lam)
    gu = gamma.upper.gap()._apply(lam)
    gl = gamma.lower.gap()._apply(lam)
    return {
        "zero_at_zero": abs(up[0]) <= tol and abs(lo[0]) <= tol,
        "ordered": bool(np.all(up >= lam - tol) and np.all(lo <= lam + tol)),
        "gaps_nondecreasing": bool(np.all(np.diff(gu) >= -tol) and np.all(np.diff(gl) >= -tol)),
        "maps_nondecreasing": bool(np.all(np.diff(up) >= -tol) and np.all(np.diff(lo) >= -tol)),
    }


# ---------------------------------------------------------------------------
# integrability constant
# ---------------------------------------------------------------------------


def kd_constant(D) -> float:
    """``int_0^inf D(y) y^(-3/2) dy`` (measure case) or
    ``int_0^1 [D(y) + dual(y)] y^(-3/2) dy`` (probability case).

    Divergence is decided from the power-law exponents of ``D`` and returned
    as ``math.inf``.
    """
    quad = integrate.quad
    if isinstance(D, ProbabilityDistortion):
        if D.small_p_exponent() <= 0.5:
            return math.inf
        dual_d = D.dual_distortion()

        def f(u):
            y = np.array([u * u])
            return 2.0 * float(D._apply(y)[0] + dual_d._apply(y)[0]) / (u * u)

        val, _ = quad(f, 0.0, 1.0, limit=200, epsabs=1e-12, epsrel=1e-10)
        return val

    if isinstance(D, JumpRateMap):
        D = D.gap()
    e0, e_inf = D.exponents()
    if e0 == math.inf:
        return 0.0
    if e0 <= 0.5 or e_inf >= 0.5:
        return math.inf

    # y = u^2 on [0, 1], y = 1/v^2 on [1, inf)
    def near(u):
        return 2.0 * float(D._apply(np.array([u * u]))[0]) / (u * u)

    def far(v):
        if v == 0.0:
            return 0.0
        return 2.0 * float(D._apply(np.array([1.0 / (v * v)]))[0])

    a, _ = quad(near, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)
    b, _ = quad(far, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)
    return a + b


# ---------------------------------------------------------------------------
# scaling families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaledDistortion(ProbabilityDistortion):
    """A scaling family frozen at one time step."""

    family: "ScalingFamily"
    delta: float
    name = "scaled"

    def _apply(self, p):
        return p + self.family.shift(p, self.delta)

    def small_p_exponent(self):
        return self.family.small_p_exponent()

    def to_config(self):
        return {"family": "scaled", "delta": self.delta}


class ScalingFamily:
    """Base class: ``psi(p, delta) = p + shift(p, delta)``."""

    delta0: float = 1.0
    sigma: float = 1.0

    def clamp(self, delta: float) -> float:
        if not delta > 0:
            raise ValueError("time step must be positive")
        return min(delta, self.delta0)

    def shift(self, p: np.ndarray, delta: float) -> np.ndarray:
        raise NotImplementedError

    def small_p_exponent(self) -> float:
        return 1.0

    def at(self, delta: float) -> ScaledDistortion:
        return ScaledDistortion(self, self.clamp(delta))

    # closed-form limits, when known
    def xi(self, p) -> np.ndarray | None:
        return None

    def gamma_plus(self) -> JumpRateMap | None:
        return None

    def gamma_minus(self) -> JumpRateMap | None:
        return None

    def jump_rate(self) -> JumpRateDistortion:
        return JumpRateDistortion(self.gamma_plus() or IdentityRate(),
                                  self.gamma_minus() or IdentityRate("lower"))


@dataclass(frozen=True)
class SqrtBrownian(ScalingFamily):
    """``p + sqrt(delta) (base(p) - p)`` for ``delta <= 1``.

    ``sigma`` only enters the normalisation of the drift function ``xi``.
    """

    base: ProbabilityDistortion
    sigma: float = 1.0
    delta0: float = 1.0

    def shift(self, p, delta):
        d = self.clamp(delta)
        return math.sqrt(d) * (self.base._apply(p) - p)

    def small_p_exponent(self):
        return self.base.small_p_exponent()

    def xi(self, p):
        p = np.asarray(p, dtype=float)
        return 2.0 * math.sqrt(3.0) * (self.base._apply(p) - p) / self.sigma

    def gamma_plus(self):
        return IdentityRate()

    def gamma_minus(self):
        return IdentityRate("lower")


@dataclass(frozen=True)
class GeneralExample(ScalingFamily):
    """Three-distortion family: sqrt-scaled drift part ``psi1`` and
    jump-rate parts ``psi2`` (upper) and ``psi3`` (lower).

    ``delta0`` is the largest power of two below one with ``C0(delta) > 0``.
    """

    psi1: ProbabilityDistortion
    psi2: ProbabilityDistortion
    psi3: ProbabilityDistortion
    sigma: float = 1.0
    delta0: float = field(default=0.0)

    def __post_init__(self):
        if self.delta0 == 0.0:
            for k in range(1, 60):
                d = 2.0 ** -k
                if self._c0(d) > 0:
                    object.__setattr__(self, "delta0", d)
                    break
            else:  # pragma: no cover - C0 > 0 for every delta < 1
                raise ValueError("no admissible delta0 found")

    def _c0(self, d: float) -> float:
        e = np.array([-math.expm1(-1.0 / d)])
        return 1.0 - d * float(self.psi2._apply(e)[0]) + d * float(self.psi3._apply(e)[0])

    def shift(self, p, delta):
        d = self.clamp(delta)
        e = np.array([-math.expm1(-1.0 / d)])
        psi2_e = float(self.psi2._apply(e)[0])
        psi3_e = float(self.psi3._apply(e)[0])
        return (d * (psi3_e - psi2_e) * p
                + math.sqrt(d) * self.sigma * (self.psi1._apply(p) - p)
                + d * self.psi2._apply(-np.expm1(-p / d))
                + d * (self.psi3._apply(-np.expm1(-(1.0 - p) / d)) - psi3_e))

    def small_p_exponent(self):
        return min(self.psi1.small_p_exponent(), self.psi2.small_p_exponent())

    def xi(self, p):
        p = np.asarray(p, dtype=float)
        return 2.0 * math.sqrt(3.0) * (self.psi1._apply(p) - p)

    def gamma_plus(self):
        return ExpCap(self.psi2, "upper")

    def gamma_minus(self):
        return ExpCap(self.psi3, "lower")


@dataclass(frozen=True)
class ConvexCGMY(ScalingFamily):
    """``(1 - c(delta)) p + c(delta) MinMaxVar_gamma(p)`` with
    ``c(delta) = gamma/(1+gamma) delta**(gamma/(1+gamma))``, ``delta <= 1``."""

    gamma: float
    sigma: float = 1.0
    delta0: float = 1.0

    def weight(self, delta: float) -> float:
        d = self.clamp(delta)
        g = self.gamma
        return g / (1.0 + g) * d ** (g / (1.0 + g))

    def shift(self, p, delta):
        return self.weight(delta) * (MinMaxVar(self.gamma)._apply(p) - p)

    def small_p_exponent(self):
        return 1.0 / (1.0 + self.gamma)

    def xi(self, p):
        # vanishing limit needs gamma > 1; see estimate_xi for the general case
        return np.zeros_like(np.asarray(p, dtype=float)) if self.gamma > 1 else None

    def gamma_plus(self):
        return PowerShift(self.gamma)

    def gamma_minus(self):
        return IdentityRate("lower")


def scaled_eval(F: ScalingFamily, p, delta: float):
    arr = _as_prob(p)
    return _scalar_or_array(arr + F.shift(arr, delta), p)


def scaling_family_from_config(cfg: dict) -> ScalingFamily:
    variant = cfg.get("variant")
    if variant == "sqrt_brownian":
        return SqrtBrownian(distortion_from_config(cfg["base"]), float(cfg.get("sigma", 1.0)))
    if variant == "general_example":
        return GeneralExample(distortion_from_config(cfg["psi1"]),
                              distortion_from_config(cfg["psi2"]),
                              distortion_from_config(cfg["psi3"]),
                              float(cfg.get("sigma", 1.0)))
    if variant == "convex_cgmy":
        return ConvexCGMY(float(cfg["gamma"]))
    raise ValueError(f"unknown scaling family {variant!r}")


# ---------------------------------------------------------------------------
# small-step limits
# ---------------------------------------------------------------------------

XI_GRID = tuple(4.0 ** -k for k in range(4, 13))


def _aitken_level(seq: Sequence[float], flat_tol: float) -> list[float]:
    out = []
    for f0, f1, f2 in zip(seq, seq[1:], seq[2:]):
        d1, d2 = f1 - f0, f2 - f1
        if abs(d2) <= flat_tol:
            out.append(f2)
            continue
        ratio = d1 / d2
        if ratio <= 1.0:
            # increments not shrinking: no geometric extrapolation possible
            out.append(math.nan)
            continue
        out.append(f2 + d2 / (ratio - 1.0))
    return out


def extrapolate_limit(values: Sequence[float], tol: float = 1e-4, flat_tol: float = 1e-15) -> float:
    """Two-level Richardson extrapolation with estimated order.

    ``values`` are samples on a geometric step grid, coarse to fine.  Each
    level removes the leading geometric error term with its order estimated
    from consecutive increments (Aitken form of Richardson).
    """
    vals = [float(v) for v in values]
    if any(not math.isfinite(v) for v in vals):
        raise NonConvergence("non-finite samples")
    incs = np.abs(np.diff(vals))
    scale = max(1.0, max(abs(v) for v in vals))
    if np.all(incs <= flat_tol * scale):
        return vals[-1]
    if incs[-1] > incs[-2] + flat_tol * scale and incs[-2] > incs[-3] + flat_tol * scale:
        raise NonConvergence("samples diverge as the step shrinks")
    level1 = _aitken_level(vals, flat_tol * scale)
    level2 = _aitken_level([v for v in level1 if math.isfinite(v)], flat_tol * scale)
    level2 = [v for v in level2 if math.isfinite(v)]
    if len(level2) < 2:
        raise NonConvergence("too few usable extrapolants")
    if abs(level2[-1] - level2[-2]) > tol:
        raise NonConvergence(
            f"successive extrapolants differ by {abs(level2[-1] - level2[-2]):.3g}")
    return level2[-1]


def estimate_xi(F: ScalingFamily, p: float, sigma: float | None = None,
                grid: Sequence[float] = XI_GRID) -> float:
    """Limit of ``(psi(p, delta) - p) / (sqrt(delta) sigma*)`` with
    ``sigma* = sigma / (2 sqrt 3)``."""
    sigma = F.sigma if sigma is None else sigma
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    _as_prob(p)
    sigma_star = sigma / (2.0 * math.sqrt(3.0))
    pa = np.array([float(p)])
    samples = [float(F.shift(pa, d)[0]) / (math.sqrt(d) * sigma_star) for d in grid]
    return extrapolate_limit(samples)


def estimate_gamma(F: ScalingFamily, lam: float, side: str = "plus",
                   grid: Sequence[float] = XI_GRID) -> float:
    """Limit of ``psi(delta lam, delta)/delta`` (plus) or of the dual (minus)."""
    if lam < 0:
        raise ValueError("jump rate must be nonnegative")
    if lam == 0:
        return 0.0
    samples = []
    for d in grid:
        if side == "plus":
            x = np.array([d * lam])
            val = x + F.shift(x, d)
        elif side == "minus":
            x = np.array([1.0 - d * lam])
            # dual(q) = q - shift(1 - q)
            val = np.array([d * lam]) - F.shift(x, d)
        else:
            raise ValueError("side must be 'plus' or 'minus'")
        samples.append(float(val[0]) / d)
    return extrapolate_limit(samples)


__all__ = [
    "CappedIdentity", "Composite", "ConvexCGMY", "DomainError", "DriftShift",
    "DualDistortion", "ExpCap", "ExpCapMap", "Exponential", "GeneralExample",
    "IdentityMap", "IdentityRate", "JumpRateDistortion", "JumpRateMap", "Linear",
    "MeasureMap", "MinMaxVar", "NonConvergence", "PiecewiseLinear", "PowerMap",
    "PowerShift", "ProbabilityDistortion", "ScaledDistortion", "ScalingFamily",
    "SqrtBrownian", "SumMap", "TabulatedMap", "TabulatedRate", "ZeroMap",
    "check_distortion", "check_jump_rate", "distortion_from_config", "dual",
    "estimate_gamma", "estimate_xi", "eval", "extrapolate_limit", "kd_constant",
    "scaled_eval", "scaling_family_from_config",
]
