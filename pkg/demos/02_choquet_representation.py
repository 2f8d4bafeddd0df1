"""Choquet integral as the supremum over a core of dominated measures."""

import numpy as np

from choquet_lattice import choquet as C
from choquet_lattice import distortion as D

rng = np.random.default_rng(0)
dist = C.DiscreteDistribution(rng.normal(size=5), rng.dirichlet(np.ones(5)))
psi = D.MinMaxVar(0.5)

value = C.choquet_probability(dist, psi)
print("values", np.round(dist.values, 4))
print("probs ", np.round(dist.probs, 4))
print("mean", dist.mean(), " Choquet", value)

# comonotone maximizer: the density puts more weight on the larger outcomes
md = C.maximizing_density(dist, psi)
print("density", np.round(md.weights, 4), " attains", md.expectation())

# random feasible measures never beat it
res = C.bruteforce_search(dist, psi, trials=20_000, seed=1)
print("best sampled", res.value, " excess", res.samples.max() - value)

# comonotone additivity: f and g both increasing in the outcome
f = dist.map(np.exp)
both = dist.map(lambda v: v + np.exp(v))
print("C[X + e^X] =", C.choquet_probability(both, psi), " C[X] + C[e^X] =", value + C.choquet_probability(f, psi))
