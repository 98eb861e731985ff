"""Richardson extrapolation of Euler trajectories to orders 2 through 8.

An order-m value is the combination M_m = Σ_{k=0}^{m-1} α_k · N(h/2^k),
where N(h) is the Euler result at stepsize h.  The weights are fixed by
requiring the combination to reproduce exact values (Σ α_k = 1) and to
cancel the error terms h^1 … h^{m-1}.  That linear system is solved exactly
over the rationals, so the published weight vectors are reproduced to the
last bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import RichcubError
from .ivp import Problem, Trajectory, euler_solve

__all__ = [
    "MIN_ORDER",
    "MAX_ORDER",
    "CoefficientVector",
    "ExtrapolationTable",
    "coefficients",
    "combine",
    "extrapolate",
    "error_coefficient",
    "conversion_factor",
]

MIN_ORDER = 2
MAX_ORDER = 8


def _solve_exact(a: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with partial pivoting over Fraction arithmetic."""
    m = len(a)
    mat = [row[:] + [r] for row, r in zip(a, rhs)]
    for col in range(m):
        pivot = max(range(col, m), key=lambda r: abs(mat[r][col]))
        if mat[pivot][col] == 0:
            raise RichcubError("singular coefficient system")
        mat[col], mat[pivot] = mat[pivot], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [v * inv for v in mat[col]]
        for r in range(m):
            if r != col and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [v - factor * p for v, p in zip(mat[r], mat[col])]
    return [row[m] for row in mat]


def _check_order(m: int) -> None:
    if not isinstance(m, int) or isinstance(m, bool):
        raise ValueError(f"order must be an integer, got {m!r}")
    if not MIN_ORDER <= m <= MAX_ORDER:
        raise ValueError(f"order must be between {MIN_ORDER} and {MAX_ORDER}, got {m}")


@dataclass(frozen=True)
class CoefficientVector:
    """Extrapolation weights for one order: floats plus the exact rationals."""

    m: int
    alphas: tuple[float, ...]
    exact: tuple[Fraction, ...]


def coefficients(m: int) -> CoefficientVector:
    """Weights α_0..α_{m-1} applied to runs at h, h/2, …, h/2^{m-1}."""
    _check_order(m)
    a = [[Fraction(1, 2 ** (i * j)) for j in range(m)] for i in range(m)]
    rhs = [Fraction(1 if i == 0 else 0) for i in range(m)]
    exact = _solve_exact(a, rhs)
    return CoefficientVector(m=m, alphas=tuple(float(v) for v in exact), exact=tuple(exact))


@dataclass(frozen=True)
class ExtrapolationTable:
    """Order-m values on the coarse grid, plus the runs that produced them."""

    h: float
    m: int
    xs: np.ndarray
    Ms: np.ndarray
    MZs: np.ndarray
    runs: tuple[Trajectory, ...]
    meta: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        """M_m at x_end."""
        return float(self.Ms[-1])


def combine(runs: Sequence[Trajectory], m: Optional[int] = None) -> ExtrapolationTable:
    """Combine a halving ladder of Euler runs into order-m values.

    runs[k] must have n·2^k steps over the same interval; only the first m
    runs are used, so a longer ladder can serve several orders.
    """
    if m is None:
        m = len(runs)
    cv = coefficients(m)
    if len(runs) < m:
        raise ValueError(f"order {m} needs {m} runs, got {len(runs)}")
    base = runs[0]
    n = base.n
    tol = 1e-12 * max(1.0, abs(float(base.xs[-1])))
    ms = np.zeros_like(base.Cs)
    mzs = np.zeros_like(base.Zs)
    for k in range(m):
        r = runs[k]
        stride = 2 ** k
        if r.n != n * stride:
            raise RichcubError(
                f"run {k} has {r.n} steps; ladder requires {n * stride}"
            )
        sub = r.xs[::stride]
        if float(np.max(np.abs(sub - base.xs))) > tol:
            raise RichcubError(f"run {k} grid does not align with the coarse grid")
        ms = ms + cv.alphas[k] * r.Cs[::stride]
        mzs = mzs + cv.alphas[k] * r.Zs[::stride]
    return ExtrapolationTable(
        h=base.h, m=m, xs=base.xs, Ms=ms, MZs=mzs, runs=tuple(runs[:m])
    )


def extrapolate(p: Problem, n: int, m: int) -> ExtrapolationTable:
    """Run the m-run halving ladder for Problem p and combine to order m.

    Every run evaluates the right-hand side fresh at each of its own nodes;
    nothing is shared between runs.
    """
    _check_order(m)
    runs = [euler_solve(p, n * 2 ** k) for k in range(m)]
    return combine(runs, m)


def error_coefficient(tm: ExtrapolationTable, tm1: ExtrapolationTable) -> np.ndarray:
    """Estimated leading error-curve K̃_m(x) = (M_m − M_{m+1}) / h^m.

    Both tables must live on the same coarse grid; tm1 must be one order
    higher than tm.
    """
    if tm1.m != tm.m + 1:
        raise ValueError(
            f"need tables of consecutive orders, got m={tm.m} and m={tm1.m}"
        )
    if tm.xs.shape != tm1.xs.shape or tm.h != tm1.h:
        raise RichcubError("error coefficient requires matching coarse grids")
    if tm.h == 0.0:
        raise ValueError("error coefficient is undefined on a degenerate interval")
    return (tm.Ms - tm1.Ms) / tm.h ** tm.m


def conversion_factor(m: int) -> float:
    """c_m = Σ α_k 2^{-km}: maps the estimated to the true error coefficient.

    The estimate K̃_m = (M_m − M_{m+1})/h^m approaches c_m · K_m as h → 0,
    where K_m is the coefficient of the h^m term in the error of M_m; so the
    true coefficient is recovered as K_m ≈ K̃_m / c_m.  The values are exact
    dyadic rationals (e.g. |1/c_4| = 64).
    """
    cv = coefficients(m)
    total = sum(
        (a * Fraction(1, 2 ** (k * m)) for k, a in enumerate(cv.exact)),
        start=Fraction(0),
    )
    return float(total)
