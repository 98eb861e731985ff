"""General outer limits: C(x) = ∫_{a(x)}^{b(x)} I(u) du with I the inner integral.

Differentiating twice gives a second-order system in x,

    C'' = I(b)·b'' − I(a)·a'' + (dI/du)(b)·(b')² − (dI/du)(a)·(a')²,

with initial values C(x0) = (b(x0) − a(x0))·I(x0) and
Z(x0) = I(b(x0))·b'(x0) − I(a(x0))·a'(x0).  The same Euler/extrapolation
machinery then applies.  This mode is experimental: the starting value
treats I as constant over the initial outer interval, which is only exact
when a(x0) == b(x0) (a warning is emitted otherwise), and its accuracy has
not been studied as thoroughly as the plain mode.

The right-hand side is computed as (b-part) − (a-part) with both parts
sharing one code path, so swapping a and b negates every output exactly and
the reduction a ≡ x0, b ≡ x reproduces the plain-mode arithmetic bit for
bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import richardson
from .expr import Expr, eval_jet
from .ivp import Problem, Trajectory, _euler_core, inner_integral, leibniz_dI

__all__ = [
    "GeneralProblem",
    "inner_I",
    "dI_du",
    "general_rhs",
    "general_euler",
    "general_solve",
    "fixed_value_problem",
]


@dataclass(frozen=True)
class GeneralProblem:
    """Double integral whose outer limits a(x), b(x) are expressions in x."""

    f: Expr
    t0: Expr
    t1: Expr
    a: Expr
    b: Expr
    x0: float
    x_end: float

    def __post_init__(self):
        if not (np.isfinite(self.x0) and np.isfinite(self.x_end)):
            raise ValueError("x0 and x_end must be finite")
        if self.x_end < self.x0:
            raise ValueError(f"x_end ({self.x_end}) must be >= x0 ({self.x0})")


def inner_I(gp: GeneralProblem, u: float) -> float:
    """I(u) = ∫_{t0(u)}^{t1(u)} f(u, t) dt."""
    return inner_integral(gp.f, gp.t0, gp.t1, u)


def dI_du(gp: GeneralProblem, u: float) -> float:
    """Derivative of the inner integral at u (differentiation under the sign)."""
    return leibniz_dI(gp.f, gp.t0, gp.t1, u)


def _limit_part(gp: GeneralProblem, x: float, limit: Expr) -> float:
    """I(ℓ)·ℓ'' + (dI/du)(ℓ)·(ℓ')² for one outer limit ℓ at x."""
    j = eval_jet(limit, "x", float(x), 0.0)
    return inner_I(gp, j.v) * j.d2 + dI_du(gp, j.v) * (j.d1 * j.d1)


def general_rhs(gp: GeneralProblem, x: float) -> float:
    """C''(x) for the general system."""
    return _limit_part(gp, x, gp.b) - _limit_part(gp, x, gp.a)


def _initial_values(gp: GeneralProblem) -> tuple[float, float]:
    aj = eval_jet(gp.a, "x", gp.x0, 0.0)
    bj = eval_jet(gp.b, "x", gp.x0, 0.0)
    if bj.v != aj.v:
        warnings.warn(
            "general-limits start value treats the inner integral as constant "
            f"over the initial outer interval [{aj.v:g}, {bj.v:g}]; "
            "C(x0) is approximate when a(x0) != b(x0)",
            stacklevel=3,
        )
    c0 = (bj.v - aj.v) * inner_I(gp, gp.x0)
    z0 = inner_I(gp, bj.v) * bj.d1 - inner_I(gp, aj.v) * aj.d1
    return c0, z0


def general_euler(gp: GeneralProblem, n: int) -> Trajectory:
    """Raw Euler run of the general system with n uniform steps."""
    c0, z0 = _initial_values(gp)
    return _euler_core(lambda x: general_rhs(gp, x), gp.x0, gp.x_end, c0, z0, n)


def general_solve(gp: GeneralProblem, n: int, m: int) -> richardson.ExtrapolationTable:
    """Euler + extrapolation ladder for the general system (experimental)."""
    richardson._check_order(m)
    runs = [general_euler(gp, n * 2 ** k) for k in range(m)]
    table = richardson.combine(runs, m)
    table.meta["experimental"] = True
    return table


def fixed_value_problem(gp: GeneralProblem, p: float) -> Problem:
    """Freeze the outer limits at x = p, giving a plain problem over [a(p), b(p)].

    Useful when only C(p) is wanted: the outer integral runs between the
    fixed values a(p) and b(p) while the inner limits stay functions of x.
    """
    p = float(p)
    lo = eval_jet(gp.a, "x", p, 0.0).v
    hi = eval_jet(gp.b, "x", p, 0.0).v
    if hi < lo:
        raise ValueError(
            f"b({p:g}) = {hi:g} is below a({p:g}) = {lo:g}; swap the outer limits "
            "and negate the result"
        )
    return Problem(f=gp.f, t0=gp.t0, t1=gp.t1, x0=lo, x_end=hi)
