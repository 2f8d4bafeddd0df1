"""Backward recursions on the recombining lattice.

The state at step ``m`` is the integer position ``k``; the log-return is
``x = d m delta + h k``.  Up-and-in claims add a flag recording whether the
barrier has been reached at one of the slice times.  Each slice is one
vectorised Choquet evaluation over all nodes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .choquet import DiscreteDistribution, choquet_probability, choquet_rows
from .distortion import Linear, ProbabilityDistortion, ScalingFamily
from .lattice import (GridSpec, StepDistribution, build_step_distribution,
                      make_grid)
from .levy import LevyModel, QSharpModel

WIDTH_SD = 12.0
MAX_LOG_RETURN = 700.0


# ---------------------------------------------------------------------------
# payoffs
# ---------------------------------------------------------------------------


class Payoff:
    """Claim on ``S = S0 exp(X)``.

    ``vanilla(x, k)`` gives the terminal value from the log-return ``x`` and
    the lattice position ``k``.  Barrier claims set ``barrier`` to the level
    ``log(H/S0)`` and pay ``vanilla`` only if it was reached.
    """

    barrier: float | None = None

    def vanilla(self, x: np.ndarray, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _spot(S0: float, x: np.ndarray) -> np.ndarray:
    return S0 * np.exp(np.minimum(x, MAX_LOG_RETURN))


@dataclass(frozen=True)
class TerminalCall(Payoff):
    S0: float
    K: float

    def __post_init__(self):
        if not (self.S0 > 0 and self.K > 0):
            raise ValueError("call needs S0 > 0 and K > 0")

    def vanilla(self, x, k):
        return np.maximum(_spot(self.S0, x) - self.K, 0.0)


@dataclass(frozen=True)
class TerminalDigital(Payoff):
    K: float
    S0: float = 1.0

    def __post_init__(self):
        if not (self.S0 > 0 and self.K > 0):
            raise ValueError("digital needs S0 > 0 and K > 0")

    def vanilla(self, x, k):
        return (_spot(self.S0, x) >= self.K).astype(float)


@dataclass(frozen=True)
class TerminalTable(Payoff):
    """Value per terminal lattice position; positions not listed pay ``default``."""

    table: Mapping[int, float]
    default: float = 0.0

    def vanilla(self, x, k):
        k = np.asarray(k)
        return np.array([self.table.get(int(i), self.default) for i in k.ravel()],
                        dtype=float).reshape(k.shape)


@dataclass(frozen=True)
class Constant(Payoff):
    c: float

    def vanilla(self, x, k):
        return np.full(np.shape(x), float(self.c))


@dataclass(frozen=True)
class Affine(Payoff):
    """``scale * inner + shift``; keeps the inner barrier."""

    inner: Payoff
    scale: float = 1.0
    shift: float = 0.0

    @property
    def barrier(self):
        return self.inner.barrier

    def vanilla(self, x, k):
        return self.scale * self.inner.vanilla(x, k) + self.shift


@dataclass(frozen=True)
class UpInDigital(Payoff):
    S0: float
    H: float

    def __post_init__(self):
        if not self.H > self.S0 > 0:
            raise ValueError("up-and-in claims need H > S0 > 0")

    @property
    def barrier(self):
        return math.log(self.H / self.S0)

    def vanilla(self, x, k):
        return np.ones(np.shape(x))


@dataclass(frozen=True)
class UpInCall(Payoff):
    S0: float
    H: float
    K: float

    def __post_init__(self):
        if not self.H > self.S0 > 0 or not self.K > 0:
            raise ValueError("up-and-in call needs H > S0 > 0 and K > 0")

    @property
    def barrier(self):
        return math.log(self.H / self.S0)

    def vanilla(self, x, k):
        return np.maximum(_spot(self.S0, x) - self.K, 0.0)


def payoff_from_config(cfg: dict) -> Payoff:
    kind = cfg["type"]
    if kind == "call":
        return TerminalCall(float(cfg["S0"]), float(cfg["K"]))
    if kind == "digital":
        return TerminalDigital(float(cfg["K"]), float(cfg.get("S0", 1.0)))
    if kind == "upin_digital":
        return UpInDigital(float(cfg["S0"]), float(cfg["H"]))
    if kind == "upin_call":
        return UpInCall(float(cfg["S0"]), float(cfg["H"]), float(cfg["K"]))
    if kind == "constant":
        return Constant(float(cfg["c"]))
    if kind == "table":
        return TerminalTable({int(k): float(v) for k, v in cfg["table"].items()},
                             float(cfg.get("default", 0.0)))
    raise ValueError(f"unknown payoff type {kind!r}")


# ---------------------------------------------------------------------------
# recursion
# ---------------------------------------------------------------------------


@dataclass
class ValuationResult:
    value: float
    slice_max: np.ndarray
    slice_min: np.ndarray
    truncated_mass: float
    runtime_ms: float
    grid: GridSpec
    captured: dict[int, np.ndarray] = field(default_factory=dict)
    positions: np.ndarray | None = None


def _resolve_psi(F, delta: float) -> ProbabilityDistortion:
    if isinstance(F, ScalingFamily):
        return F.at(delta)
    if isinstance(F, ProbabilityDistortion):
        return F
    raise TypeError("expected a ScalingFamily or a ProbabilityDistortion")


def state_radius(m: LevyModel, g: GridSpec, sd: StepDistribution) -> int:
    """Half-width of the position range: every reachable position for small
    ``n``, otherwise a fixed number of standard deviations."""
    ks, _ = sd.support()
    reach = g.n_steps * int(np.max(np.abs(ks)))
    width = WIDTH_SD * math.sqrt(g.T * m.variance_rate()) + abs(m.drift) * g.T
    return int(min(reach, math.ceil(width / g.h)))


class _SliceOperator:
    """Choquet expectation of next-slice values for every node at once."""

    def __init__(self, ks: np.ndarray, probs: np.ndarray, psi: ProbabilityDistortion, K: int):
        self.ks = ks
        self.probs = probs
        self.psi = psi
        pos = np.arange(-K, K + 1)
        self.idx = np.clip(pos[:, None] + ks[None, :], -K, K) + K
        order = np.argsort(-ks, kind="stable")
        # descending offsets = descending values on a nondecreasing slice
        self.up_order = order
        self.up_w = psi.unchecked(np.cumsum(probs[order])[:-1])
        self.down_order = order[::-1]
        self.down_w = psi.unchecked(np.cumsum(probs[order[::-1]])[:-1])

    def _sorted(self, v: np.ndarray, order: np.ndarray, w: np.ndarray) -> np.ndarray:
        vs = v[self.idx[:, order]]
        if vs.shape[1] == 1:
            return vs[:, 0].copy()
        return vs[:, -1] + (vs[:, :-1] - vs[:, 1:]) @ w

    def __call__(self, v: np.ndarray) -> np.ndarray:
        dv = np.diff(v)
        if np.all(dv >= 0):
            return self._sorted(v, self.up_order, self.up_w)
        if np.all(dv <= 0):
            return self._sorted(v, self.down_order, self.down_w)
        return choquet_rows(v[self.idx], self.probs, self.psi)


def _recursion(m: LevyModel, psi: ProbabilityDistortion, payoff: Payoff, g: GridSpec,
               sd: StepDistribution, capture: Sequence[int] = ()) -> ValuationResult:
    t0 = time.perf_counter()
    ks, probs = sd.support()
    K = state_radius(m, g, sd)
    pos = np.arange(-K, K + 1)
    op = _SliceOperator(ks, probs, psi, K)
    n = g.n_steps

    def x_at(step: int) -> np.ndarray:
        return m.drift * (step * g.delta) + g.h * pos

    b = payoff.barrier
    x_n = x_at(n)
    if b is None:
        v = np.asarray(payoff.vanilla(x_n, pos), dtype=float)
        v_hit = None
    else:
        v_hit = np.asarray(payoff.vanilla(x_n, pos), dtype=float)
        v = np.where(x_n >= b, v_hit, 0.0)
    captured = {}
    smax = np.empty(n + 1)
    smin = np.empty(n + 1)
    smax[n], smin[n] = v.max(), v.min()
    if n in capture:
        captured[n] = v.copy()
    for step in range(n - 1, -1, -1):
        if v_hit is None:
            v = op(v)
        else:
            v_hit = op(v_hit)
            v = op(v)
            if step > 0:
                v = np.where(x_at(step) >= b, v_hit, v)
        smax[step], smin[step] = v.max(), v.min()
        if step in capture:
            captured[step] = v.copy()
    runtime = 1000.0 * (time.perf_counter() - t0)
    return ValuationResult(float(v[K]), smax, smin, sd.truncated_mass, runtime, g, captured, pos)


def distorted_value(m: LevyModel, F, payoff: Payoff, g: GridSpec,
                    capture: Sequence[int] = ()) -> ValuationResult:
    """Time-consistent distorted value ``Pi_0`` on the lattice.

    ``F`` is a scaling family (evaluated at the grid's time step) or a fixed
    probability distortion.  ``capture`` lists steps whose node values are
    kept in the result.
    """
    sd = build_step_distribution(m, g)
    return _recursion(m, _resolve_psi(F, g.delta), payoff, g, sd, capture)


def linear_value(m: LevyModel | QSharpModel, payoff: Payoff, g: GridSpec,
                 capture: Sequence[int] = ()) -> ValuationResult:
    """Plain expectation by the same recursion.

    For a tilted model the grid is rebuilt from the tilted triplet with the
    same horizon, step count and truncation tolerance.
    """
    if isinstance(m, QSharpModel):
        model = m.model
        g = make_grid(model, g.T, g.n_steps, g.eps_trunc)
    else:
        model = m
    sd = build_step_distribution(model, g)
    return _recursion(model, Linear(), payoff, g, sd, capture)


MAX_ENUM_STEPS = 4
MAX_ENUM_SUPPORT = 7


def enumerate_paths_value(m: LevyModel, psi, payoff: Payoff, g: GridSpec) -> float:
    """Distorted value by expanding every path of the non-recombining tree."""
    sd = build_step_distribution(m, g)
    ks, probs = sd.support()
    if g.n_steps > MAX_ENUM_STEPS or ks.size > MAX_ENUM_SUPPORT:
        raise ValueError("instance too large for path enumeration")
    psi = _resolve_psi(psi, g.delta)
    b = payoff.barrier
    n = g.n_steps

    def x_at(step, k):
        return m.drift * (step * g.delta) + g.h * np.asarray([k])

    def node(step: int, k: int, hit: bool) -> float:
        if step > 0 and b is not None and not hit:
            hit = bool(x_at(step, k)[0] >= b)
        if step == n:
            if b is not None and not hit:
                return 0.0
            return float(payoff.vanilla(x_at(n, k), np.array([k]))[0])
        vals = np.array([node(step + 1, k + int(j), hit) for j in ks])
        return choquet_probability(DiscreteDistribution(vals, probs), psi)

    return node(0, 0, False)


@dataclass(frozen=True)
class SweepRow:
    n: int
    delta: float
    h: float
    a: int
    value: float
    reference: float
    gap: float
    truncated_mass: float
    runtime_ms: float


def convergence_sweep(m: LevyModel, F, payoff: Payoff, n_list: Sequence[int], T: float = 1.0,
                      reference: float | Callable[[], float] | None = None,
                      eps_trunc: float | None = None) -> list[SweepRow]:
    """Distorted values along increasing ``n``; gaps against ``reference``
    (a number, a callable, or ``None`` for the value at the largest ``n``)."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    results = []
    for n in n_list:
        kw = {} if eps_trunc is None else {"eps_trunc": eps_trunc}
        g = make_grid(m, T, n, **kw)
        results.append(distorted_value(m, F, payoff, g))
    if reference is None:
        ref = results[-1].value
    elif callable(reference):
        ref = float(reference())
    else:
        ref = float(reference)
    return [SweepRow(r.grid.n_steps, r.grid.delta, r.grid.h, r.grid.a, r.value, ref,
                     abs(r.value - ref), r.truncated_mass, r.runtime_ms) for r in results]


__all__ = [
    "Affine", "Constant", "Payoff", "SweepRow", "TerminalCall", "TerminalDigital",
    "TerminalTable", "UpInCall", "UpInDigital", "ValuationResult", "convergence_sweep",
    "distorted_value", "enumerate_paths_value", "linear_value", "payoff_from_config",
    "state_radius",
]
