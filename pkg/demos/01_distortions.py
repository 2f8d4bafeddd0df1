"""Probability distortions, their duals and small-step limits."""

import numpy as np

from choquet_lattice import distortion as D

p = np.linspace(0.0, 1.0, 6)
for psi in (D.MinMaxVar(1.0), D.Exponential(0.9)):
    print(type(psi).__name__, np.round(psi(p), 6))        # concave, above the diagonal
    print("  dual", np.round(psi.dual(p), 6))             # below it
    print("  axioms", D.check_distortion(psi))

# a scaling family moves away from the identity like sqrt(delta)
F = D.SqrtBrownian(D.Exponential(0.9), sigma=0.2)
for delta in (1e-2, 1e-4, 1e-6):
    print(f"delta={delta:g}  psi(1/6)={D.scaled_eval(F, 1 / 6, delta):.8f}")

# drift limit xi, estimated from shrinking steps and compared with the closed form
print("xi(1/6) estimate", D.estimate_xi(F, 1 / 6), "closed form", float(F.xi(1 / 6)))
print("xi(5/6) estimate", D.estimate_xi(F, 5 / 6), "closed form", float(F.xi(5 / 6)))

# the convex CGMY family has no drift limit but a jump-rate limit lam + g lam^(1/(1+g))
G = D.ConvexCGMY(0.5)
for lam in (0.5, 2.0, 10.0):
    print(f"Gamma+({lam}) estimate {D.estimate_gamma(G, lam):.6f}  closed {float(D.PowerShift(0.5)(lam)):.6f}")

# K_D constant: finite for a capped identity, infinite for a too-singular power map
print("K_D capped identity", D.kd_constant(D.CappedIdentity(1.0)))
print("K_D power 2/3", D.kd_constant(D.PowerMap(0.5, 2 / 3)))
