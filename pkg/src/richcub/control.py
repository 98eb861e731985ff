"""Tolerance-driven stepsize selection.

A pilot ladder at a moderate stepsize yields the estimated error curve
K̃₄(x); the largest magnitude over the nodes fixes the stepsize that should
bring the order-4 result within a user tolerance:

    h* = (ε / max|K̃₄|)^{1/4},   n = ⌈(x_end − x0)/h*⌉,   h = (x_end − x0)/n.

The production ladder is then rerun at the planned h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import richardson
from .ivp import Problem, euler_solve

__all__ = [
    "StepsizePlan",
    "estimate_k4",
    "plan_stepsize",
    "tune_and_solve",
    "DEFAULT_PILOT_H",
    "ROUNDING_FLOOR",
]

DEFAULT_PILOT_H = 0.01
ROUNDING_FLOOR = 1e-14


@dataclass(frozen=True)
class StepsizePlan:
    """Planned stepsize for a target tolerance.

    flags may contain "unconstrained" (error curve identically zero, a
    single coarse step suffices) and "rounding-limited" (tolerance below
    what double precision can honour).
    """

    epsilon: float
    k4max: float
    h_star: float
    n: int
    h: float
    flags: tuple[str, ...] = ()


def plan_stepsize(epsilon: float, k4, x0: float, x_end: float) -> StepsizePlan:
    """Apply the stepsize formulas to an estimated error curve."""
    epsilon = float(epsilon)
    if not (epsilon > 0):
        raise ValueError(f"tolerance must be > 0, got {epsilon}")
    k4 = np.asarray(k4, dtype=float)
    if k4.size == 0:
        raise ValueError("error-curve data must be non-empty")
    x0 = float(x0)
    x_end = float(x_end)
    if not x_end > x0:
        raise ValueError(f"planning requires x_end > x0, got [{x0}, {x_end}]")
    span = x_end - x0
    flags: list[str] = []
    if epsilon < ROUNDING_FLOOR:
        flags.append("rounding-limited")
    k4max = float(np.max(np.abs(k4)))
    if k4max == 0.0:
        flags.append("unconstrained")
        return StepsizePlan(
            epsilon=epsilon, k4max=0.0, h_star=math.inf, n=1, h=span,
            flags=tuple(flags),
        )
    h_star = (epsilon / k4max) ** 0.25
    n = max(1, math.ceil(span / h_star))
    h = span / n
    return StepsizePlan(
        epsilon=epsilon, k4max=k4max, h_star=h_star, n=n, h=h, flags=tuple(flags)
    )


def estimate_k4(p: Problem, h_pilot: float = DEFAULT_PILOT_H) -> tuple[np.ndarray, "richardson.ExtrapolationTable"]:
    """Pilot ladder: K̃₄ over the coarse nodes, plus the pilot order-4 table.

    Five Euler runs (h, h/2, …, h/16) provide both M₄ and M₅; the first four
    serve order 4 and all five serve order 5, so no run is wasted.
    """
    h_pilot = float(h_pilot)
    if not (h_pilot > 0):
        raise ValueError(f"pilot stepsize must be > 0, got {h_pilot}")
    if p.x_end == p.x0:
        raise ValueError("stepsize tuning requires x_end > x0")
    n_pilot = max(1, math.ceil((p.x_end - p.x0) / h_pilot))
    runs = [euler_solve(p, n_pilot * 2 ** k) for k in range(5)]
    t4 = richardson.combine(runs[:4], 4)
    t5 = richardson.combine(runs, 5)
    k4 = richardson.error_coefficient(t4, t5)
    # Nodes where M4 and M5 agree to rounding carry no usable error signal;
    # treat them as exact so an exactly-solved problem plans unconstrained.
    agree = np.abs(t4.Ms - t5.Ms) <= 32.0 * np.finfo(float).eps * np.maximum(
        1.0, np.abs(t4.Ms)
    )
    k4 = np.where(agree, 0.0, k4)
    return k4, t4


def tune_and_solve(
    p: Problem, epsilon: float, h_pilot: float = DEFAULT_PILOT_H
) -> tuple[StepsizePlan, "richardson.ExtrapolationTable"]:
    """Pilot, plan, then rerun the order-4 ladder at the planned stepsize."""
    k4, _ = estimate_k4(p, h_pilot)
    plan = plan_stepsize(epsilon, k4, p.x0, p.x_end)
    table = richardson.extrapolate(p, plan.n, 4)
    return plan, table
