"""Command-line front end.

Problems are flat ``key = value`` text files (``#`` starts a comment):

    f     = sin(x*t)
    t0    = x/5
    t1    = x^2 + 1
    x0    = 1
    x_end = 5

Optional keys: ``a``, ``b`` (outer limits as expressions in x — their
presence selects general-limits mode), ``h``, ``n``, ``order``,
``tolerance``, ``mode`` (``plain`` or ``general``).  Flags override file
values.  Exit codes: 0 success, 2 usage/parse errors, 3 numeric failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import control, correct, genlimits, richardson
from .errors import (
    DomainEvalError,
    ExprSyntaxError,
    FileFormatError,
    NonFiniteError,
    RichcubError,
)
from .expr import Expr, parse
from .genlimits import GeneralProblem
from .ivp import Problem, euler_solve

__all__ = ["ProblemFile", "parse_problem_file", "load_problem_file", "main"]

_EXPR_KEYS = ("f", "t0", "t1", "a", "b")
_REAL_KEYS = ("x0", "x_end", "h", "tolerance")
_INT_KEYS = ("n", "order")
_ALL_KEYS = set(_EXPR_KEYS) | set(_REAL_KEYS) | set(_INT_KEYS) | {"mode"}
_MANDATORY = ("f", "t0", "t1", "x0", "x_end")

TABLE_EPSILONS = (1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)


@dataclass(frozen=True)
class ProblemFile:
    """Parsed problem file; optional entries are None when absent."""

    f: Expr
    t0: Expr
    t1: Expr
    x0: float
    x_end: float
    a: Optional[Expr] = None
    b: Optional[Expr] = None
    h: Optional[float] = None
    n: Optional[int] = None
    order: Optional[int] = None
    tolerance: Optional[float] = None
    mode: Optional[str] = None

    @property
    def is_general(self) -> bool:
        return self.mode == "general" or (self.mode is None and self.a is not None)


def parse_problem_file(text: str) -> ProblemFile:
    """Parse the key = value document; raises FileFormatError with line info."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()  # '#' never occurs in values
        if not stripped:
            continue
        if "=" not in stripped:
            raise FileFormatError(f"line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise FileFormatError(f"line {lineno}: unknown key '{key}'")
        if key in raw:
            raise FileFormatError(f"line {lineno}: duplicate key '{key}'")
        if not value:
            raise FileFormatError(f"line {lineno}: key '{key}' has no value")
        raw[key] = value

    for key in _MANDATORY:
        if key not in raw:
            raise FileFormatError(f"missing mandatory key '{key}'")

    fields: dict[str, object] = {}
    for key, value in raw.items():
        if key in _EXPR_KEYS:
            try:
                fields[key] = parse(value)
            except ExprSyntaxError as e:
                raise FileFormatError(f"key '{key}': {e}") from e
        elif key in _REAL_KEYS:
            try:
                fields[key] = float(value)
            except ValueError:
                raise FileFormatError(f"key '{key}': not a number: {value!r}") from None
        elif key in _INT_KEYS:
            try:
                fields[key] = int(value)
            except ValueError:
                raise FileFormatError(f"key '{key}': not an integer: {value!r}") from None
        else:  # mode
            if value not in ("plain", "general"):
                raise FileFormatError(f"key 'mode': must be 'plain' or 'general', got {value!r}")
            fields[key] = value

    if ("a" in fields) != ("b" in fields):
        raise FileFormatError("keys 'a' and 'b' must be given together")
    mode = fields.get("mode")
    if mode == "general" and "a" not in fields:
        raise FileFormatError("mode = general requires keys 'a' and 'b'")
    if mode == "plain" and "a" in fields:
        raise FileFormatError("mode = plain contradicts outer-limit keys 'a'/'b'")
    return ProblemFile(**fields)  # type: ignore[arg-type]


def load_problem_file(path: str) -> ProblemFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise FileFormatError(f"cannot read {path}: {e}") from e
    return parse_problem_file(text)


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_csv(out: Optional[str], header: str, rows, comments: Sequence[str] = ()):
    lines = [f"# {c}" for c in comments]
    lines.append(header)
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _resolve_order(flag: Optional[int], pf: ProblemFile) -> int:
    order = flag if flag is not None else (pf.order if pf.order is not None else 4)
    if not 1 <= order <= richardson.MAX_ORDER:
        raise ValueError(f"order out of range: {order} (must be 1..{richardson.MAX_ORDER})")
    return order


def _resolve_steps(ns, pf: ProblemFile, x0: float, x_end: float) -> int:
    span = x_end - x0
    n_flag = getattr(ns, "steps", None)
    h_flag = getattr(ns, "h", None)
    if n_flag is not None and h_flag is not None:
        raise ValueError("give exactly one of --steps and --h, not both")
    n_src, h_src = n_flag, h_flag
    if n_src is None and h_src is None:
        if pf.n is not None and pf.h is not None:
            raise ValueError("problem file sets both 'n' and 'h'; keep one")
        n_src, h_src = pf.n, pf.h
    if span == 0.0:
        return 0  # degenerate: single node regardless of stepsize input
    if n_src is not None:
        if n_src < 1:
            raise ValueError(f"step count must be >= 1, got {n_src}")
        return n_src
    if h_src is not None:
        if not h_src > 0:
            raise ValueError(f"stepsize must be > 0, got {h_src}")
        n = max(1, round(span / h_src))
        h_eff = span / n
        if abs(h_eff - h_src) > 0.001 * h_src:
            print(
                f"warning: stepsize adjusted from {h_src:g} to {h_eff:g} "
                f"({n} steps) to land on x_end",
                file=sys.stderr,
            )
        return n
    raise ValueError("no stepsize given: use --steps or --h (or n/h in the problem file)")


def _make_plain(pf: ProblemFile) -> Problem:
    return Problem(f=pf.f, t0=pf.t0, t1=pf.t1, x0=pf.x0, x_end=pf.x_end)


def _make_general(pf: ProblemFile) -> GeneralProblem:
    return GeneralProblem(
        f=pf.f, t0=pf.t0, t1=pf.t1, a=pf.a, b=pf.b, x0=pf.x0, x_end=pf.x_end
    )


def _solve_curves(pf: ProblemFile, n: int, order: int):
    """(xs, Cs, Zs) at the coarse nodes, order 1 meaning the raw Euler run."""
    if pf.is_general:
        gp = _make_general(pf)
        if order == 1:
            tr = genlimits.general_euler(gp, n)
            return tr.xs, tr.Cs, tr.Zs
        table = genlimits.general_solve(gp, n, order)
        return table.xs, table.Ms, table.MZs
    p = _make_plain(pf)
    if order == 1:
        tr = euler_solve(p, n)
        return tr.xs, tr.Cs, tr.Zs
    table = richardson.extrapolate(p, n, order)
    return table.xs, table.Ms, table.MZs


def cmd_solve(ns) -> int:
    pf = load_problem_file(ns.file)
    order = _resolve_order(ns.order, pf)
    n = _resolve_steps(ns, pf, pf.x0, pf.x_end)
    xs, cs, zs = _solve_curves(pf, n, order)
    _write_csv(ns.out, "x,C,Z", zip(xs, cs, zs))
    print(f"C({pf.x_end:g}) = {float(cs[-1]):.15g}")
    return 0


def cmd_tune(ns) -> int:
    pf = load_problem_file(ns.file)
    if pf.is_general:
        raise ValueError("tuning supports plain problems only")
    p = _make_plain(pf)
    if ns.table:
        k4, _ = control.estimate_k4(p, ns.pilot)
        rows = []
        for eps in TABLE_EPSILONS:
            plan = control.plan_stepsize(eps, k4, p.x0, p.x_end)
            rows.append((plan.epsilon, plan.k4max, plan.h_star, plan.n, plan.h))
        _write_csv(ns.out, "epsilon,k4max,h_star,n,h", rows)
        return 0
    tolerance = ns.tolerance if ns.tolerance is not None else pf.tolerance
    if tolerance is None:
        raise ValueError("no tolerance given: use --tolerance (or tolerance in the problem file)")
    plan, table = control.tune_and_solve(p, tolerance, ns.pilot)
    print(f"k4max = {_fmt(plan.k4max)}")
    print(f"h_star = {_fmt(plan.h_star)}")
    print(f"n = {plan.n}")
    print(f"h = {_fmt(plan.h)}")
    if plan.flags:
        print(f"flags = {','.join(plan.flags)}")
    print(f"C({pf.x_end:g}) = {table.value:.15g}")
    return 0


def cmd_correct(ns) -> int:
    pf = load_problem_file(ns.file)
    if pf.is_general:
        raise ValueError("correction mode supports plain problems only")
    if ns.rule != "simpson":
        raise ValueError(f"unknown rule '{ns.rule}' (available: simpson)")
    order = _resolve_order(ns.order, pf)
    n = _resolve_steps(ns, pf, pf.x0, pf.x_end)
    p = _make_plain(pf)
    rule = correct.simpson_rule(p)
    pc = correct.corrected_problem(p, rule)
    if order == 1:
        tr = euler_solve(pc, n)
        xs, cs = tr.xs, tr.Cs
    else:
        table = richardson.extrapolate(pc, n, order)
        xs, cs = table.xs, table.Ms
    qs = np.array([rule.q(float(x)).v for x in xs])
    _write_csv(ns.out, "x,Q,C,Q_plus_C", zip(xs, qs, cs, qs + cs))
    print(f"Q+C({pf.x_end:g}) = {float(qs[-1] + cs[-1]):.15g}")
    return 0


def cmd_coeffs(ns) -> int:
    cv = richardson.coefficients(ns.order)
    small = all(f.denominator <= 65536 for f in cv.exact)
    close = all(
        abs(float(f) - a) <= 1e-12 * max(1.0, abs(a))
        for f, a in zip(cv.exact, cv.alphas)
    )
    if small and close:
        print(" ".join(str(f) for f in cv.exact))
    else:
        print(" ".join(_fmt(a) for a in cv.alphas))
    return 0


def cmd_kcurves(ns) -> int:
    pf = load_problem_file(ns.file)
    if pf.is_general:
        raise ValueError("k-curves support plain problems only")
    if pf.x_end == pf.x0:
        raise ValueError("k-curves require x_end > x0")
    n = _resolve_steps(ns, pf, pf.x0, pf.x_end)
    p = _make_plain(pf)
    runs = [euler_solve(p, n * 2 ** k) for k in range(6)]
    h = runs[0].h
    xs = runs[0].xs
    m_curves = {1: runs[0].Cs}
    for j in range(2, 7):
        m_curves[j] = richardson.combine(runs[:j], j).Ms
    k_cols = [(m_curves[j] - m_curves[j + 1]) / h ** j for j in range(1, 6)]
    factors = [1.0] + [richardson.conversion_factor(j) for j in range(2, 6)]
    comments = [f"c_{j} = {_fmt(c)}" for j, c in zip(range(1, 6), factors)]
    _write_csv(ns.out, "x,K1t,K2t,K3t,K4t,K5t", zip(xs, *k_cols), comments=comments)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="richcub",
        description="Double integrals with variable limits via Euler + Richardson extrapolation.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(sp, steps=True, order=True, out=True):
        sp.add_argument("file", help="problem file (key = value lines)")
        if order:
            sp.add_argument("--order", type=int, default=None, help="extrapolation order (1..8, default 4)")
        if steps:
            sp.add_argument("--steps", type=int, default=None, help="number of Euler steps on the coarse grid")
            sp.add_argument("--h", type=float, default=None, help="coarse stepsize; rounded to a whole number of steps")
        if out:
            sp.add_argument("--out", default=None, help="CSV output path (default: standard output)")

    sp = sub.add_parser("solve", help="solve and emit x,C,Z curves")
    add_common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("tune", help="pick a stepsize for a tolerance, then solve")
    sp.add_argument("file")
    sp.add_argument("--tolerance", type=float, default=None, help="target absolute tolerance")
    sp.add_argument("--pilot", type=float, default=control.DEFAULT_PILOT_H, help="pilot stepsize (default 0.01)")
    sp.add_argument("--table", action="store_true", help="sweep built-in tolerances and print the plan table")
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_tune)

    sp = sub.add_parser("correct", help="impose a cubature rule and solve for its correction curve")
    add_common(sp)
    sp.add_argument("--rule", default="simpson", help="cubature rule name (simpson)")
    sp.set_defaults(fn=cmd_correct)

    sp = sub.add_parser("coeffs", help="print extrapolation coefficients")
    sp.add_argument("--order", type=int, required=True)
    sp.set_defaults(fn=cmd_coeffs)

    sp = sub.add_parser("kcurves", help="estimated error-coefficient curves")
    add_common(sp, order=False)
    sp.set_defaults(fn=cmd_kcurves)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return ns.fn(ns)
    except (FileFormatError, ExprSyntaxError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DomainEvalError, NonFiniteError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return 3
    except RichcubError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
