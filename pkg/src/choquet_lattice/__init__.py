"""Distorted expectations of Lévy models on moment-matched lattices."""

from .choquet import (DiscreteDistribution, StepFunctionOnMeasure, bruteforce_sup, choquet_measure,
                      choquet_probability, driver_g, maximizing_density)
from .closedform import GbmSpec, gbm_call, gbm_upin_digital_reflection
from .coupling import ScaledExponential, TabulatedSubordinator, couple_subordinators, marginal_check
from .distortion import (ConvexCGMY, DomainError, Exponential, GeneralExample, JumpRateDistortion,
                         Linear, MinMaxVar, NonConvergence, PiecewiseLinear, PowerShift,
                         SqrtBrownian, check_distortion, estimate_gamma, estimate_xi, kd_constant)
from .lattice import (GridSpec, LatticeInfeasible, build_step_distribution, grid_for_tick,
                      make_grid, validate_conditions)
from .levy import LevyModel, ModelError, TabulatedTails, TailCGMY, tilt_qsharp
from .valuation import (TerminalCall, TerminalDigital, UpInDigital, convergence_sweep,
                        distorted_value, enumerate_paths_value, linear_value)

__version__ = "0.1.0"
