"""Tension allocation: warm-started SQP over tensions and cable directions.

The decision vector stacks n tension magnitudes followed by n unit cable
directions (4n variables).  The solver minimizes the sum of squared tensions
plus a weighted alignment penalty on pairwise direction dot products, subject
to force balance, nonnegative tensions, and unit-norm directions.
"""

from .problem import (
    AllocProblem,
    AllocSolution,
    AllocStatus,
    SqpSettings,
    constraints,
    eval_objective,
    initial_guess,
    objective_hessian,
    pack,
    unpack,
)
from .qp import QpInfeasible, qp_subproblem
from .sqp import kkt_residual, sqp_solve
from .baseline import BaselineInfeasible, baseline_allocate, fixed_cone_directions

__all__ = [
    "AllocProblem",
    "AllocSolution",
    "AllocStatus",
    "SqpSettings",
    "BaselineInfeasible",
    "QpInfeasible",
    "baseline_allocate",
    "constraints",
    "eval_objective",
    "fixed_cone_directions",
    "initial_guess",
    "kkt_residual",
    "objective_hessian",
    "pack",
    "unpack",
    "qp_subproblem",
    "sqp_solve",
]
