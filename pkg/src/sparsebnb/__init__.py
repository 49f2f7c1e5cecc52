"""Certified global solves of L0-regularized estimation problems.

min_x f(Ax) + sum_i [lam * 1(x_i != 0) + h(x_i)] for convex losses f and a
catalogue of coordinate penalties h, via branch-and-bound over supports with
convex-envelope relaxations and duality-gap certificates.
"""

from .bnb import BnbOpts, Solution, solve
from .exceptions import (
    BranchError,
    ConfigError,
    DegenerateError,
    DimensionError,
    DomainError,
    NumericalError,
    SizeError,
    SparseBnbError,
)
from .intervals import Interval
from .l0reg import L0Regularizer
from .losses import LeastSquares, Logistic, SquaredHinge, loss_from_json
from .oracle import (
    Density,
    exhaustive_solve,
    gen_bernoulli_mixture,
    map_penalty_from_density,
    mixture_problem,
    restricted_solve,
)
from .path import PathSpec, fit_path, lambda_max
from .penalties import (
    L1,
    L1L2,
    BigM,
    BigML1,
    BigML2,
    PenaltyModel,
    PenaltyParams,
    PositiveL1,
    PositiveL2,
    PowerP,
    penalty_from_json,
)
from .relaxation import Problem, RelaxResult, SolveOpts, solve_relaxation

__version__ = "0.1.0"

__all__ = [
    "BigM",
    "BigML1",
    "BigML2",
    "BnbOpts",
    "BranchError",
    "ConfigError",
    "DegenerateError",
    "Density",
    "DimensionError",
    "DomainError",
    "Interval",
    "L0Regularizer",
    "L1",
    "L1L2",
    "LeastSquares",
    "Logistic",
    "NumericalError",
    "PathSpec",
    "PenaltyModel",
    "PenaltyParams",
    "PositiveL1",
    "PositiveL2",
    "PowerP",
    "Problem",
    "RelaxResult",
    "SizeError",
    "Solution",
    "SolveOpts",
    "SparseBnbError",
    "SquaredHinge",
    "exhaustive_solve",
    "fit_path",
    "gen_bernoulli_mixture",
    "lambda_max",
    "loss_from_json",
    "map_penalty_from_density",
    "mixture_problem",
    "penalty_from_json",
    "restricted_solve",
    "solve",
    "solve_relaxation",
    "__version__",
]
