"""Cubature correction mode.

A cheap cubature estimate Q(x) of the running double integral is subtracted
from the target, and the IVP machinery solves for the remainder C(x):

    Z' = g(x) − Q''(x),   C(x0) = −Q(x0),   Z(x0) = I(x0) − Q'(x0).

Q(x) + C(x) then reproduces the double integral, with C acting as the error
curve of the rule.  The built-in rule is the 3-node Simpson product rule with
variable inner limits; its first and second derivatives come from the same
Jet2 pass that computes the value (x enters through the outer width, the
outer midpoint, and the inner limits).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

from .errors import NonFiniteError
from .expr import Jet2, checked_jet_eval
from .ivp import Problem

__all__ = ["CubatureRule", "simpson_rule", "corrected_problem", "zero_rule"]


@dataclass(frozen=True)
class CubatureRule:
    """A cubature estimate as a jet-valued function of the outer limit.

    q(x) returns Q(x), Q'(x), Q''(x) as a Jet2 with float components.
    """

    q: Callable[[float], Jet2]


def simpson_rule(p: Problem) -> CubatureRule:
    """Simpson product rule for p's integrand and inner limits.

    Q(x) applies Simpson weights over the outer nodes {x0, (x0+x)/2, x} and,
    at each outer node ξ, Simpson weights over the inner interval
    [t0(ξ), t1(ξ)].  All arithmetic is Jet2 seeded on x, so the derivatives
    are exact for the rule as written, not finite-difference estimates.
    """
    f, t0, t1, x0 = p.f, p.t0, p.t1, p.x0
    four = Jet2(4.0)
    six = Jet2(6.0)
    half = Jet2(0.5)
    tseed = Jet2(0.0)  # limits are expressions in x alone

    def q(x: float) -> Jet2:
        xj = Jet2(float(x), 1.0, 0.0)
        x0j = Jet2(x0)
        outer = (x0j, (x0j + xj) * half, xj)

        def inner(xi: Jet2) -> Jet2:
            lo = checked_jet_eval(t0, xi, tseed)
            hi = checked_jet_eval(t1, xi, tseed)
            mid = (lo + hi) * half
            f_lo = checked_jet_eval(f, xi, lo)
            f_mid = checked_jet_eval(f, xi, mid)
            f_hi = checked_jet_eval(f, xi, hi)
            return (hi - lo) / six * (f_lo + four * f_mid + f_hi)

        total = inner(outer[0]) + four * inner(outer[1]) + inner(outer[2])
        out = (xj - x0j) * (total / six)
        if not (math.isfinite(out.v) and math.isfinite(out.d1) and math.isfinite(out.d2)):
            raise NonFiniteError(f"cubature rule produced a non-finite value at x = {x!r}")
        return out

    return CubatureRule(q=q)


def zero_rule() -> CubatureRule:
    """The trivial rule Q ≡ 0; correction mode with it is the identity."""
    return CubatureRule(q=lambda x: Jet2(0.0, 0.0, 0.0))


def corrected_problem(p: Problem, rule: CubatureRule) -> Problem:
    """Attach a cubature rule so solving yields the correction curve C."""
    if p.correction is not None:
        raise ValueError("problem already has a correction rule attached")
    return dataclasses.replace(p, correction=rule)
