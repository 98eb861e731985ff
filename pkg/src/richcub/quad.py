"""Gauss-Legendre quadrature: rule construction and composite integration.

The rule nodes are roots of the Legendre polynomial P_n, found by Newton
iteration from Chebyshev-style initial guesses; weights follow from the
derivative values.  ``integrate`` applies the rule on fixed-width panels so
accuracy is uniform over long intervals.
"""

from __future__ import annotations

import math
import os
from typing import Callable

import numpy as np

from .errors import DomainEvalError, NonFiniteError

__all__ = ["gauss_rule", "integrate", "DEFAULT_ORDER", "PANEL_WIDTH"]

DEFAULT_ORDER = 20
PANEL_WIDTH = 0.5
_MIN_ORDER = 2
_MAX_ORDER = 64
_ENV_ORDER = "RC_QUAD_ORDER"

_rule_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _legendre(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate P_n and P_n' at ``x`` via the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    # Derivative from the recurrence relation; |x| < 1 at every root.
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point Gauss-Legendre rule on [-1, 1].

    Returns read-only arrays; results are cached per order.
    """
    if not isinstance(order, int) or isinstance(order, bool):
        raise ValueError(f"quadrature order must be an integer, got {order!r}")
    if not _MIN_ORDER <= order <= _MAX_ORDER:
        raise ValueError(
            f"quadrature order must be between {_MIN_ORDER} and {_MAX_ORDER}, got {order}"
        )
    cached = _rule_cache.get(order)
    if cached is not None:
        return cached

    n = order
    i = np.arange(1, n + 1, dtype=float)
    x = np.cos(math.pi * (i - 0.25) / (n + 0.5))
    last_step = np.inf
    for _ in range(100):
        p, dp = _legendre(n, x)
        step = p / dp
        x -= step
        worst = float(np.max(np.abs(step)))
        if worst < 1e-15:
            break
        if worst >= last_step and worst < 1e-12:
            # Increment has stalled at the rounding floor; accept.
            break
        last_step = worst
    else:  # pragma: no cover - Newton converges in a handful of iterations
        raise NonFiniteError(f"Newton iteration failed to converge for order {n}")

    # Enforce exact antisymmetry of the node set about 0.
    x = (x - x[::-1]) / 2.0
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # Nodes from the cosine guesses come out descending; store ascending.
    x = x[::-1].copy()
    w = w[::-1].copy()
    x.setflags(write=False)
    w.setflags(write=False)
    _rule_cache[order] = (x, w)
    return x, w


def _effective_order() -> int:
    raw = os.environ.get(_ENV_ORDER)
    if raw is None:
        return DEFAULT_ORDER
    try:
        order = int(raw)
    except ValueError:
        raise ValueError(f"{_ENV_ORDER} must be an integer, got {raw!r}") from None
    if not _MIN_ORDER <= order <= _MAX_ORDER:
        raise ValueError(
            f"{_ENV_ORDER} must be between {_MIN_ORDER} and {_MAX_ORDER}, got {order}"
        )
    return order


def integrate(g: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> float:
    """Integral of ``g`` from ``a`` to ``b`` (signed) by composite Gauss-Legendre.

    ``g`` must accept an ndarray of abscissae and return values of the same
    shape (scalar-constant results are broadcast).  The interval is split into
    panels of width at most ``PANEL_WIDTH`` and panel contributions are summed
    with compensated summation.
    """
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0
    order = _effective_order()
    nodes, weights = gauss_rule(order)
    panels = max(1, math.ceil(abs(b - a) / PANEL_WIDTH))
    edges = np.linspace(a, b, panels + 1)
    lo = edges[:-1]
    hi = edges[1:]
    half = (hi - lo) / 2.0
    mid = (hi + lo) / 2.0
    # All panel abscissae in one flat array: panel-major, node-minor.
    ts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = np.asarray(g(ts), dtype=float)
    if vals.shape == ():
        vals = np.full(ts.shape, float(vals))
    if vals.shape != ts.shape:
        raise ValueError(
            f"integrand returned shape {vals.shape}, expected {ts.shape}"
        )
    scaled = (half[:, None] * weights[None, :]).ravel() * vals
    total = math.fsum(scaled.tolist())
    if not math.isfinite(total):
        raise NonFiniteError(
            f"quadrature over [{a!r}, {b!r}] accumulated a non-finite value"
        )
    return total
