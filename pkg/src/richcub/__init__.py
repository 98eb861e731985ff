"""richcub: double integrals with variable limits via Euler + Richardson.

A double integral C(x) = ∫_{x0}^{x} ∫_{t0(u)}^{t1(u)} f(u,t) dt du is recast
as the pure-quadrature system C' = Z, Z' = g(x) and integrated with the
explicit Euler method; Richardson extrapolation over a stepsize-halving
ladder raises the accuracy to orders 2-8.  On top of that sit
tolerance-driven stepsize selection, a Simpson cubature-correction mode,
and an experimental general-outer-limits mode.
"""

from .control import StepsizePlan, estimate_k4, plan_stepsize, tune_and_solve
from .correct import CubatureRule, corrected_problem, simpson_rule, zero_rule
from .errors import (
    DomainEvalError,
    ExprSyntaxError,
    FileFormatError,
    NonFiniteError,
    RichcubError,
)
from .expr import Expr, Jet2, eval_jet, evaluate, parse, to_src
from .genlimits import (
    GeneralProblem,
    dI_du,
    fixed_value_problem,
    general_euler,
    general_rhs,
    general_solve,
    inner_I,
)
from .ivp import Problem, Trajectory, euler_solve, initial_values, rhs_g
from .quad import gauss_rule, integrate
from .richardson import (
    CoefficientVector,
    ExtrapolationTable,
    coefficients,
    combine,
    conversion_factor,
    error_coefficient,
    extrapolate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "parse", "evaluate", "eval_jet", "to_src", "Expr", "Jet2",
    "gauss_rule", "integrate",
    "Problem", "Trajectory", "rhs_g", "initial_values", "euler_solve",
    "coefficients", "combine", "extrapolate", "error_coefficient",
    "conversion_factor", "CoefficientVector", "ExtrapolationTable",
    "StepsizePlan", "estimate_k4", "plan_stepsize", "tune_and_solve",
    "CubatureRule", "simpson_rule", "corrected_problem", "zero_rule",
    "GeneralProblem", "inner_I", "dI_du", "general_rhs", "general_euler",
    "general_solve", "fixed_value_problem",
    "RichcubError", "ExprSyntaxError", "DomainEvalError", "NonFiniteError",
    "FileFormatError",
]
