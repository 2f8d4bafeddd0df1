"""Moment-matched multinomial random walk approximating a Lévy model.

One step of the walk moves ``Z`` ticks of size ``h``.  Big moves
``|Z| >= a`` copy the jump measure over one tick each,

    p_k = delta * Lambda([kh, (k+1)h)),   k >= a     (mirrored for k <= -a),

moves ``2 <= |Z| <= a-1`` are impossible, and ``p_{-1}, p_0, p_1`` are
chosen so that ``h Z`` has mean zero and variance ``delta (sigma^2 +
Sigma^2(R))``.  The deterministic drift is carried separately as ``d t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .levy import LevyModel, TailCGMY

DEFAULT_EPS_TRUNC = 1e-10
MAX_KMAX = 50_000_000
TICK_TOL = 1e-12


class LatticeInfeasible(RuntimeError):
    """A grid condition fails or a step probability leaves ``[0, 1]``.

    ``condition`` names the violated requirement.
    """

    def __init__(self, condition: str, message: str):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


def sigma_tilde2(m: LevyModel, a: float) -> float:
    s2 = m.sigma2_total()
    return m.sigma2 + s2 / a if m.sigma2 > 0 else s2


def _tail_sum(m: LevyModel, x: float) -> float:
    return m.tail_plus(x) + m.tail_minus(x)


def choose_a(m: LevyModel, h: float) -> int:
    """Cutoff between the trinomial core and the jump buckets.

    Tail-CGMY uses the power rule together with ``h^{-1/2} |log h|``; other
    jump models take the smallest ``a`` above the logarithmic rule that meets
    the inner-variance lower bound.  The result is at least 2 and satisfies
    ``a h <= 1`` whenever ``h <= 1/2``.
    """
    if not 0 < h < 1:
        raise ValueError("choose_a needs 0 < h < 1")
    if not m.has_jumps():
        return 2
    cap = max(2, math.floor(1.0 / h))
    log_rule = h ** -0.5 * abs(math.log(h))
    if isinstance(m.jumps, TailCGMY):
        j = m.jumps
        s2 = m.sigma2_total()
        power = (s2 * (2.0 - j.Y) / (2.0 * j.C * j.Y)) ** (1.0 / (3.0 - j.Y)) * h ** ((j.Y - 2.0) / (3.0 - j.Y))
        return int(min(cap, max(2, math.ceil(max(power, log_rule)))))
    s2 = m.sigma2_total()
    a = max(2, math.ceil(log_rule))
    if a >= cap:
        return cap
    if m.sigma2_interval(-a * h, a * h) >= s2 / a - m.sigma2:
        return a
    lo, hi = a, cap
    if m.sigma2_interval(-hi * h, hi * h) < s2 / hi - m.sigma2:
        return cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if m.sigma2_interval(-mid * h, mid * h) >= s2 / mid - m.sigma2:
            hi = mid
        else:
            lo = mid
    return hi


def find_kmax(m: LevyModel, h: float, delta: float, a: int, eps_trunc: float) -> int:
    """Smallest ``k >= a`` with ``tail_plus(kh) + tail_minus(kh) < eps/delta``.

    Returns ``a - 1`` when no bucket carries mass above the threshold.
    """
    if not m.has_jumps():
        return a - 1
    thr = eps_trunc / delta
    if _tail_sum(m, a * h) < thr:
        return a - 1
    lo, hi = a, 2 * a
    while _tail_sum(m, hi * h) >= thr:
        lo, hi = hi, 2 * hi
        if hi > MAX_KMAX:
            raise LatticeInfeasible("truncation", "jump tails decay too slowly for eps_trunc")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail_sum(m, mid * h) < thr:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class GridSpec:
    T: float
    n_steps: int
    h: float
    a: int
    eps_trunc: float = DEFAULT_EPS_TRUNC
    k_max: int = 1

    def __post_init__(self):
        if not self.T > 0 or self.n_steps < 1:
            raise ValueError("grid needs T > 0 and n_steps >= 1")
        if not self.h > 0 or self.a < 2:
            raise ValueError("grid needs h > 0 and a >= 2")

    @property
    def delta(self) -> float:
        return self.T / self.n_steps


def make_grid(m: LevyModel, T: float, n_steps: int, eps_trunc: float = DEFAULT_EPS_TRUNC,
              a: int | None = None, h: float | None = None) -> GridSpec:
    """Grid meeting ``h^2 = 3 delta Sigma~^2(a)``.

    With ``sigma > 0`` and jumps, ``a`` and ``h`` depend on each other; the
    pair is found by fixed-point iteration, and ``h`` is always recomputed
    from the final ``a``.  Passing ``h`` skips the tick identity (used to
    build deliberately nonconforming grids).
    """
    delta = T / n_steps
    if a is None:
        if not m.has_jumps():
            a = 2
        elif m.sigma2 == 0:
            a = choose_a(m, math.sqrt(3.0 * delta * m.sigma2_total()))
        else:
            a_cur = choose_a(m, math.sqrt(3.0 * delta * sigma_tilde2(m, 2)))
            seen = set()
            while a_cur not in seen:
                seen.add(a_cur)
                a_cur = choose_a(m, math.sqrt(3.0 * delta * sigma_tilde2(m, a_cur)))
            a = a_cur
    if h is None:
        h = math.sqrt(3.0 * delta * sigma_tilde2(m, a))
    k_max = max(find_kmax(m, h, delta, a, eps_trunc), 1)
    return GridSpec(T, n_steps, h, a, eps_trunc, k_max)


def grid_for_tick(m: LevyModel, h: float, n_steps: int = 1,
                  eps_trunc: float = DEFAULT_EPS_TRUNC) -> GridSpec:
    """Grid with a prescribed tick: ``a = choose_a(h)`` and ``delta`` solved
    from the tick identity."""
    a = choose_a(m, h)
    delta = h * h / (3.0 * sigma_tilde2(m, a))
    k_max = max(find_kmax(m, h, delta, a, eps_trunc), 1)
    return GridSpec(n_steps * delta, n_steps, h, a, eps_trunc, k_max)


@dataclass(frozen=True)
class StepDistribution:
    """One-step law of ``Z`` on offsets ``ks``.

    ``truncated_mass`` is the mass beyond the last bucket, folded into the
    outermost buckets on each side.
    """

    ks: np.ndarray
    probs: np.ndarray
    alpha: float
    beta: float
    gamma: float
    truncated_mass: float
    h: float
    delta: float

    def prob(self, k: int) -> float:
        idx = np.searchsorted(self.ks, k)
        if idx < self.ks.size and self.ks[idx] == k:
            return float(self.probs[idx])
        return 0.0

    @property
    def p_minus(self) -> float:
        return self.prob(-1)

    @property
    def p_zero(self) -> float:
        return self.prob(0)

    @property
    def p_plus(self) -> float:
        return self.prob(1)

    def mean(self) -> float:
        """``h E[Z]``."""
        return self.h * math.fsum(self.ks * self.probs)

    def variance(self) -> float:
        """``h^2 Var[Z]``."""
        m1 = math.fsum(self.ks * self.probs)
        return self.h ** 2 * (math.fsum(self.ks.astype(float) ** 2 * self.probs) - m1 * m1)

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Offsets with positive probability and their probabilities."""
        keep = self.probs > 0
        return self.ks[keep], self.probs[keep]


@dataclass(frozen=True)
class _Buckets:
    ks: np.ndarray      # positive offsets a..k_max
    plus: np.ndarray    # tail differences (per unit time) on the right
    minus: np.ndarray
    folded: float       # per unit time, both sides


def _buckets(m: LevyModel, g: GridSpec) -> _Buckets:
    if not m.has_jumps() or g.k_max < g.a:
        empty = np.zeros(0)
        return _Buckets(np.zeros(0, dtype=np.int64), empty, empty, 0.0)
    ks = np.arange(g.a, g.k_max + 1, dtype=np.int64)
    edges = np.append(ks, g.k_max + 1) * g.h
    tp = np.asarray(m.jumps.tail_plus(edges), dtype=float)
    tm = np.asarray(m.jumps.tail_minus(edges), dtype=float)
    plus = tp[:-1] - tp[1:]
    minus = tm[:-1] - tm[1:]
    plus[-1] += tp[-1]
    minus[-1] += tm[-1]
    return _Buckets(ks, plus, minus, float(tp[-1] + tm[-1]))


def _abg(m: LevyModel, g: GridSpec, b: _Buckets) -> tuple[float, float, float, float]:
    """``alpha``, ``beta / h``, ``gamma / delta`` and ``q = gamma/(delta Sigma~^2)``."""
    d = g.delta
    kf = b.ks.astype(float)
    big = np.concatenate([b.plus, b.minus]) * d
    alpha = 1.0 - math.fsum(big)
    beta_h = -d * math.fsum(np.concatenate([kf * b.plus, -kf * b.minus]))
    second = math.fsum(np.concatenate([kf * kf * b.plus, kf * kf * b.minus]))
    gamma_d = (m.sigma2 + m.sigma2_total()) - g.h * g.h * second
    return alpha, beta_h, gamma_d, gamma_d / sigma_tilde2(m, g.a)


@dataclass(frozen=True)
class Condition:
    name: str
    passed: bool
    slack: float
    detail: str = ""


def validate_conditions(m: LevyModel, g: GridSpec) -> dict[str, Condition]:
    """Grid feasibility report.

    ``tick_identity``: ``h^2 = 3 delta Sigma~^2(a)``.
    ``inner_variance_lower_bound`` / ``inner_variance_upper_bound``: the
    two-sided bound on ``Sigma^2((-ah, ah))``.
    ``cutoff_mesh``: ``a h <= 1``.
    ``moment_bound_chain``: ``|beta|/h <= gamma/h^2 <= alpha <= 1``.
    """
    out = {}
    st2 = sigma_tilde2(m, g.a)
    target = 3.0 * g.delta * st2
    rel = abs(g.h * g.h - target) / max(target, 1e-300)
    out["tick_identity"] = Condition("tick_identity", rel <= TICK_TOL, TICK_TOL - rel,
                                     f"h^2 = {g.h * g.h:.6g}, 3 delta Sigma~^2(a) = {target:.6g}")
    s2 = m.sigma2_total()
    inner = m.sigma2_interval(-g.a * g.h, g.a * g.h) if m.has_jumps() else 0.0
    lower = s2 / g.a - m.sigma2
    ind = 1.0 if m.sigma2 == 0 else 0.0
    upper = 2.0 * m.sigma2 + s2 * (ind * 3.0 * (1.0 - 1.0 / g.a) + 1.0 / g.a - 2.0 / g.a ** 2)
    out["inner_variance_lower_bound"] = Condition(
        "inner_variance_lower_bound", inner >= lower - 1e-15, inner - lower,
        f"Sigma^2((-ah, ah)) = {inner:.6g} vs Sigma^2(R)/a - sigma^2 = {lower:.6g}")
    out["inner_variance_upper_bound"] = Condition(
        "inner_variance_upper_bound", inner <= upper + 1e-15, upper - inner,
        f"Sigma^2((-ah, ah)) = {inner:.6g} vs bound {upper:.6g}")
    out["cutoff_mesh"] = Condition("cutoff_mesh", g.a * g.h <= 1.0, 1.0 - g.a * g.h,
                                   f"a h = {g.a * g.h:.6g}")
    b = _buckets(m, g)
    alpha, beta_h, gamma_d, q = _abg(m, g, b)
    # |beta|/h <= gamma/h^2 <= alpha <= 1, using gamma/h^2 = q/3 under the tick identity
    g_h2 = gamma_d * g.delta / (g.h * g.h)
    s1 = g_h2 - abs(beta_h)
    s2_ = alpha - g_h2
    s3 = 1.0 - alpha
    slack = min(s1, s2_, s3)
    tol = 1e-14
    out["moment_bound_chain"] = Condition(
        "moment_bound_chain", slack >= -tol, slack,
        f"|beta|/h = {abs(beta_h):.6g}, gamma/h^2 = {g_h2:.6g}, alpha = {alpha:.6g}")
    return out


def conditions_hold(report: dict[str, Condition]) -> bool:
    return all(c.passed for c in report.values())


def build_step_distribution(m: LevyModel, g: GridSpec, check: bool = True) -> StepDistribution:
    """Lattice one-step law; raises :class:`LatticeInfeasible` on failure."""
    if check:
        report = validate_conditions(m, g)
        for c in report.values():
            if not c.passed:
                raise LatticeInfeasible(c.name, c.detail)
    b = _buckets(m, g)
    alpha, beta_h, gamma_d, q = _abg(m, g, b)
    # p_{+-1} = (gamma/h^2 +- beta/h)/2 and gamma/h^2 = q/3 on a conforming grid
    p_plus = (q + 3.0 * beta_h) / 6.0
    p_minus = (q - 3.0 * beta_h) / 6.0
    p_zero = (3.0 * alpha - q) / 3.0
    d = g.delta
    ks = np.concatenate([-b.ks[::-1], np.array([-1, 0, 1], dtype=np.int64), b.ks])
    probs = np.concatenate([d * b.minus[::-1], [p_minus, p_zero, p_plus], d * b.plus])
    if np.any(probs < -1e-15) or np.any(probs > 1.0 + 1e-15):
        bad = ks[(probs < -1e-15) | (probs > 1.0 + 1e-15)]
        raise LatticeInfeasible("moment_bound_chain",
                                f"step probabilities outside [0, 1] at offsets {bad[:5].tolist()}")
    probs = np.clip(probs, 0.0, 1.0)
    truncated = d * b.folded
    if truncated > g.eps_trunc:
        raise LatticeInfeasible("truncation", f"folded tail mass {truncated:.3g} exceeds eps_trunc")
    return StepDistribution(ks, probs, alpha, beta_h * g.h, gamma_d * d, truncated, g.h, d)


def inner_probability_lower_bound(m: LevyModel, g: GridSpec) -> float:
    """Lower bound on ``min(p_1, p_{-1})`` for ``sigma > 0``; zero otherwise."""
    if m.sigma2 == 0:
        return 0.0
    c_sigma = m.sigma2_total() / (3.0 * m.sigma2)
    c_star = c_sigma / math.sqrt(g.a * g.a * g.h)
    return (1.0 / 6.0 - 0.5 * c_star * math.sqrt(g.h)) * m.sigma2 / sigma_tilde2(m, g.a)


# ---------------------------------------------------------------------------
# semimartingale characteristics
# ---------------------------------------------------------------------------


def _stieltjes(m: LevyModel, f: Callable[[np.ndarray], np.ndarray], r: float,
               side: str, n: int = 200_001) -> float:
    tail = m.jumps.tail_plus if side == "plus" else m.jumps.tail_minus
    hi = r
    while tail(hi) > 1e-18 and hi < 1e6:
        hi *= 2.0
    x = np.linspace(r, hi, n)
    t = np.asarray(tail(x))
    mid = 0.5 * (x[1:] + x[:-1])
    sgn = 1.0 if side == "plus" else -1.0
    return float(np.sum(f(sgn * mid) * (t[:-1] - t[1:])) + f(np.array([sgn * hi]))[0] * t[-1])


def jump_integral(m: LevyModel, f: Callable[[np.ndarray], np.ndarray], r: float) -> float:
    """``int f dLambda`` for ``f`` vanishing on ``(-r, r)``."""
    if not m.has_jumps():
        return 0.0
    if isinstance(m.jumps, TailCGMY):
        j = m.jumps
        fp = lambda x: float(f(np.array([x]))[0] * j.density_plus(x))
        fm = lambda x: float(f(np.array([-x]))[0] * j.density_minus(x))
        total = 0.0
        for g_ in (fp, fm):
            for lo, hi in ((r, 1.0), (1.0, math.inf)) if r < 1.0 else ((r, math.inf),):
                val, _ = integrate.quad(g_, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12)
                total += val
        return total
    return _stieltjes(m, f, r, "plus") + _stieltjes(m, f, r, "minus")


@dataclass(frozen=True)
class CharacteristicsReport:
    drift_gap: float
    variance_gap: float
    jump_gap: float
    variance_lattice: float
    variance_target: float
    jump_lattice: float
    jump_target: float


def characteristics_check(m: LevyModel, g: GridSpec, t: float,
                          test_fn: Callable[[np.ndarray], np.ndarray],
                          vanish_radius: float) -> CharacteristicsReport:
    """Compare lattice characteristics at time ``t`` with the Lévy targets.

    Truncation for the drift characteristic is ``1{|x| <= 1}``.
    """
    if not 0 < t <= g.T + 1e-15:
        raise ValueError("t must lie in (0, T]")
    sd = build_step_distribution(m, g, check=False)
    steps = math.floor(t / g.delta + 1e-12)
    x = sd.ks * g.h
    big = np.abs(x) > 1.0
    b_lat = m.drift * t + steps * (sd.mean() - math.fsum(x[big] * sd.probs[big]))
    if m.has_jumps():
        big_mean = jump_integral(m, lambda y: np.where(np.abs(y) > 1.0, y, 0.0), 1.0)
    else:
        big_mean = 0.0
    b_target = t * (m.drift - big_mean)
    c_lat = steps * sd.variance()
    c_target = t * m.variance_rate()
    nz = sd.ks != 0
    j_lat = steps * math.fsum(np.asarray(test_fn(x[nz])) * sd.probs[nz])
    j_target = t * jump_integral(m, test_fn, vanish_radius)
    return CharacteristicsReport(abs(b_lat - b_target), abs(c_lat - c_target), abs(j_lat - j_target),
                                 c_lat, c_target, j_lat, j_target)


__all__ = [
    "CharacteristicsReport", "Condition", "GridSpec", "LatticeInfeasible", "StepDistribution",
    "build_step_distribution", "characteristics_check", "choose_a", "conditions_hold",
    "find_kmax", "grid_for_tick", "inner_probability_lower_bound", "jump_integral", "make_grid",
    "sigma_tilde2", "validate_conditions",
]
