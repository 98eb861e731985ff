"""Recasting a double integral with variable inner limits as an IVP.

For C(x) = ∫_{x0}^{x} ∫_{t0(u)}^{t1(u)} f(u, t) dt du the derivative C' is
the inner integral I(x).  Writing Z = C' and differentiating once more gives
the pure-quadrature system

    C' = Z,    Z' = g(x),      C(x0) = 0,  Z(x0) = I(x0),

where g is the derivative of the inner integral, obtained by differentiating
under the integral sign:

    g(u) = f(u, t1(u))·t1'(u) − f(u, t0(u))·t0'(u) + ∫_{t0(u)}^{t1(u)} ∂f/∂x dt.

Both components are advanced with the explicit Euler step; accumulation is
compensated (Neumaier) so the O(h) method error is not polluted by rounding
when step counts run into the thousands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import quad
from .errors import RichcubError
from .expr import Expr, Jet2, checked_jet_eval, eval_jet

__all__ = [
    "Problem",
    "Trajectory",
    "inner_integral",
    "leibniz_dI",
    "initial_values",
    "rhs_g",
    "euler_solve",
]

SPACING_TOL = 1e-12


@dataclass(frozen=True)
class Problem:
    """A double integral in IVP form.

    f is the integrand over (x, t); t0 and t1 are the inner limits as
    expressions in x (any appearance of t in them is ignored by evaluation
    with t fixed at 0).  Integration runs from x0 to x_end, x_end >= x0.

    correction, when set, is a cubature rule object exposing q(x) -> Jet2;
    its value is subtracted from the target so the IVP solves for the
    (small) remainder:  Z' = g − q'' with shifted initial values.
    """

    f: Expr
    t0: Expr
    t1: Expr
    x0: float
    x_end: float
    correction: Optional[object] = None

    def __post_init__(self):
        if not (np.isfinite(self.x0) and np.isfinite(self.x_end)):
            raise ValueError("x0 and x_end must be finite")
        if self.x_end < self.x0:
            raise ValueError(f"x_end ({self.x_end}) must be >= x0 ({self.x0})")


@dataclass(frozen=True)
class Trajectory:
    """Euler output on a uniform grid: nodes xs, values Cs and Zs."""

    h: float
    xs: np.ndarray
    Cs: np.ndarray
    Zs: np.ndarray

    def __post_init__(self):
        n = self.xs.shape[0]
        if self.Cs.shape[0] != n or self.Zs.shape[0] != n:
            raise RichcubError("trajectory arrays must have equal length")
        if n == 0:
            raise RichcubError("trajectory must contain at least one node")
        if n > 1:
            tol = SPACING_TOL * max(1.0, abs(float(self.xs[-1])))
            gaps = np.diff(self.xs)
            if float(np.max(np.abs(gaps - self.h))) > tol:
                raise RichcubError("trajectory nodes are not uniformly spaced")
        for arr in (self.xs, self.Cs, self.Zs):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        """Number of steps (nodes minus one)."""
        return self.xs.shape[0] - 1


def _limit_value_and_slopes(limit: Expr, u: float) -> Jet2:
    # Inner limits are expressions in x; t is held at 0 and ignored.
    return eval_jet(limit, "x", float(u), 0.0)


def inner_integral(f: Expr, t0: Expr, t1: Expr, u: float) -> float:
    """I(u) = ∫_{t0(u)}^{t1(u)} f(u, t) dt."""
    lo = _limit_value_and_slopes(t0, u).v
    hi = _limit_value_and_slopes(t1, u).v

    def values(ts: np.ndarray) -> np.ndarray:
        return checked_jet_eval(f, Jet2(float(u)), Jet2(ts)).v

    return quad.integrate(values, lo, hi)


def leibniz_dI(f: Expr, t0: Expr, t1: Expr, u: float) -> float:
    """dI/du by differentiation under the integral sign."""
    u = float(u)
    j0 = _limit_value_and_slopes(t0, u)
    j1 = _limit_value_and_slopes(t1, u)
    f_hi = checked_jet_eval(f, Jet2(u), Jet2(j1.v)).v
    f_lo = checked_jet_eval(f, Jet2(u), Jet2(j0.v)).v
    boundary = float(f_hi) * j1.d1 - float(f_lo) * j0.d1

    def dfdx(ts: np.ndarray) -> np.ndarray:
        return checked_jet_eval(f, Jet2(u, 1.0), Jet2(ts)).d1

    return boundary + quad.integrate(dfdx, j0.v, j1.v)


def rhs_g(p: Problem, x: float) -> float:
    """Right-hand side Z'(x); fresh evaluation at every call, no caching."""
    g = leibniz_dI(p.f, p.t0, p.t1, x)
    if p.correction is not None:
        g = g - p.correction.q(x).d2
    return g


def initial_values(p: Problem) -> tuple[float, float]:
    """(C(x0), Z(x0)); with a correction attached both are shifted by q."""
    z0 = inner_integral(p.f, p.t0, p.t1, p.x0)
    if p.correction is None:
        return 0.0, z0
    qj = p.correction.q(p.x0)
    return 0.0 - qj.v, z0 - qj.d1


def _euler_core(
    rhs: Callable[[float], float],
    x0: float,
    x_end: float,
    c0: float,
    z0: float,
    n: int,
) -> Trajectory:
    if x_end == x0:
        return Trajectory(
            h=0.0,
            xs=np.array([x0]),
            Cs=np.array([c0]),
            Zs=np.array([z0]),
        )
    if n < 1:
        raise ValueError(f"step count must be >= 1, got {n}")
    h = (x_end - x0) / n
    xs = x0 + h * np.arange(n + 1)
    xs[-1] = x_end
    cs = np.empty(n + 1)
    zs = np.empty(n + 1)
    cs[0] = c0
    zs[0] = z0
    c, cc = c0, 0.0  # running value + Neumaier compensation
    z, cz = z0, 0.0
    for i in range(n):
        dc = h * (z + cz)
        s = c + dc
        if abs(c) >= abs(dc):
            cc += (c - s) + dc
        else:
            cc += (dc - s) + c
        c = s
        dz = h * rhs(float(xs[i]))
        u = z + dz
        if abs(z) >= abs(dz):
            cz += (z - u) + dz
        else:
            cz += (dz - u) + z
        z = u
        cs[i + 1] = c + cc
        zs[i + 1] = z + cz
    return Trajectory(h=h, xs=xs, Cs=cs, Zs=zs)


def euler_solve(p: Problem, n: int) -> Trajectory:
    """Explicit Euler on C' = Z, Z' = g with n uniform steps.

    The right-hand side is evaluated fresh at every node.  A degenerate
    problem (x_end == x0) yields a single-node trajectory regardless of n.
    """
    c0, z0 = initial_values(p)
    return _euler_core(lambda x: rhs_g(p, x), p.x0, p.x_end, c0, z0, n)
