import math

import numpy as np
from hypothesis import strategies as st

from choquet_lattice import choquet, distortion

FAMILIES = [
    distortion.Linear(),
    distortion.MinMaxVar(0.5),
    distortion.Exponential(0.9),
    distortion.PiecewiseLinear(((0.0, 0.0), (0.2, 0.5), (1.0, 1.0))),
]

probs01 = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def distortions(draw):
    kind = draw(st.sampled_from(["linear", "minmaxvar", "exponential", "piecewise", "composite"]))
    if kind == "linear":
        return distortion.Linear()
    if kind == "minmaxvar":
        return distortion.MinMaxVar(draw(st.floats(0.0, 5.0)))
    if kind == "exponential":
        return distortion.Exponential(draw(st.floats(0.01, 20.0)))
    if kind == "piecewise":
        x = draw(st.floats(0.05, 0.95))
        y = draw(st.floats(x, 1.0))
        return distortion.PiecewiseLinear(((0.0, 0.0), (x, y), (1.0, 1.0)))
    w = draw(st.floats(0.05, 0.95))
    return distortion.Composite(((w, distortion.MinMaxVar(1.0)), (1.0 - w, distortion.Exponential(2.0))))


@st.composite
def discrete_dists(draw, max_atoms=6):
    n = draw(st.integers(1, max_atoms))
    vals = draw(st.lists(st.floats(-10.0, 10.0, allow_nan=False), min_size=n, max_size=n))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
    p = w / w.sum()
    p[-1] = 1.0 - math.fsum(p[:-1])
    return choquet.DiscreteDistribution(np.array(vals), p)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
