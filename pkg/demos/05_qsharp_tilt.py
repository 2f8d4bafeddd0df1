"""Distorted value of an increasing claim versus a plain expectation under the tilted model."""

from choquet_lattice import distortion as D
from choquet_lattice import lattice as LA
from choquet_lattice import levy as L
from choquet_lattice import valuation as V

call = V.TerminalCall(100.0, 100.0)

# GBM: the tilt only raises the drift
gbm = L.LevyModel.gbm(0.0, 0.2)
F = D.SqrtBrownian(D.Exponential(0.9), sigma=0.2)
q = L.tilt_qsharp(gbm, 0.5 * float(F.xi(1 / 6) + F.xi(5 / 6)))
print("GBM drift shift", q.drift_shift)
for n in (250, 500, 1000):
    g = LA.make_grid(gbm, 1.0, n)
    d = V.distorted_value(gbm, F, call, g).value
    lin = V.linear_value(q, call, g).value
    print(f"  n={n:5d} distorted {d:.5f} tilted {lin:.5f} ({(d - lin) / lin:+.3%})")

# Tail-CGMY: the power shift fattens the right tail; its closed form
cgmy = L.LevyModel(0.0, 0.0, L.TailCGMY(1.0, 5.0, 10.0, 0.5))
G = D.ConvexCGMY(2.0)
q = L.tilt_qsharp(cgmy, 0.0, G.jump_rate())
print("tilt mean", q.drift_shift, " closed form", L.cgmy_csharp(1.0, 10.0, 0.5, 2.0))
for n in (250, 1000):
    g = LA.make_grid(cgmy, 1.0, n, eps_trunc=1e-16)
    d = V.distorted_value(cgmy, G, call, g).value
    lin = V.linear_value(q, call, g).value
    print(f"  n={n:5d} distorted {d:.4f} tilted {lin:.4f} ({(d - lin) / lin:+.2%}); a*h = {g.a * g.h:.3f}")
# most of the tilt sits on jumps smaller than a*h, which the trinomial core does not distort
