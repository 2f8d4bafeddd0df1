"""Tail-CGMY jumps and the moment-matched lattice built from them."""

import numpy as np

from choquet_lattice import lattice as LA
from choquet_lattice import levy as L

jumps = L.TailCGMY(C=1.0, G=5.0, M=5.0, Y=0.5)
print("tail at 1", float(jumps.tail_plus(1.0)))
print("Sigma^2(R) closed form", jumps.sigma2_closed_form(),
      " quadrature", L.JumpMeasure.sigma2_total(jumps))

# GBM: the core is the classical 1/6, 2/3, 1/6 trinomial at every step size
gbm = L.LevyModel.gbm(0.0, 0.2)
sd = LA.build_step_distribution(gbm, LA.make_grid(gbm, 1.0, 500))
print("GBM step", sd.p_minus, sd.p_zero, sd.p_plus)

# pure-jump CGMY: big moves copy the jump measure bucket by bucket
m = L.LevyModel(0.0, 0.0, jumps)
for n in (100, 1000):
    g = LA.make_grid(m, 1.0, n)
    sd = LA.build_step_distribution(m, g)
    print(f"n={n}: h={g.h:.4g} a={g.a} k_max={g.k_max} p0={sd.p_zero:.4f} "
          f"var/delta={sd.variance() / g.delta:.6f} (target {m.variance_rate():.6f})")
    for c in LA.validate_conditions(m, g).values():
        print("   ", c.name, "ok" if c.passed else "FAILS", c.detail)

# with a Brownian part the inner probabilities approach 1/6 only slowly
mixed = L.LevyModel(0.0, 0.04, jumps)
for j in (10, 14, 18):
    g = LA.grid_for_tick(mixed, 2.0 ** -j, eps_trunc=1e-14)
    sd = LA.build_step_distribution(mixed, g, check=False)
    print(f"h=2^-{j}: p_1 - 1/6 = {sd.p_plus - 1 / 6:.4f}")

# lattice characteristics against the Levy targets
f = lambda x: np.where(np.abs(x) >= 0.5, x * x / (1 + x * x), 0.0)
for n in (250, 1000):
    rep = LA.characteristics_check(m, LA.make_grid(m, 1.0, n), 1.0, f, 0.5)
    print(f"n={n}: jump gap {rep.jump_gap:.4f}, variance gap {rep.variance_gap:.2e}")
