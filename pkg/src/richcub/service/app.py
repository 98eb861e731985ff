"""FastAPI application exposing solve/tune/correct/coeffs."""

from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import control, correct, genlimits, richardson
from ..errors import DomainEvalError, ExprSyntaxError, NonFiniteError, RichcubError
from ..expr import parse
from ..genlimits import GeneralProblem
from ..ivp import Problem, euler_solve
from .schemas import (
    CoeffsResponse,
    CorrectRequest,
    CorrectResponse,
    HealthResponse,
    ProblemSpec,
    SolveRequest,
    SolveResponse,
    TuneRequest,
    TuneResponse,
)

app = FastAPI(
    title="richcub",
    description="Double integrals with variable limits via Euler + Richardson extrapolation.",
)


@contextmanager
def _mapped_errors():
    """Translate library errors: bad input → 400, numeric failure → 422."""
    try:
        yield
    except (ExprSyntaxError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    except (DomainEvalError, NonFiniteError) as e:
        raise HTTPException(status_code=422, detail=str(e)) from e
    except RichcubError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


def _parse_expr(key: str, src: str):
    try:
        return parse(src)
    except ExprSyntaxError as e:
        raise HTTPException(status_code=400, detail=f"key '{key}': {e}") from e


def _build(spec: ProblemSpec):
    """Problem or GeneralProblem from the request payload."""
    if (spec.a is None) != (spec.b is None):
        raise HTTPException(status_code=400, detail="a and b must be given together")
    f = _parse_expr("f", spec.f)
    t0 = _parse_expr("t0", spec.t0)
    t1 = _parse_expr("t1", spec.t1)
    with _mapped_errors():
        if spec.a is not None:
            return GeneralProblem(
                f=f, t0=t0, t1=t1,
                a=_parse_expr("a", spec.a), b=_parse_expr("b", spec.b),
                x0=spec.x0, x_end=spec.x_end,
            )
        return Problem(f=f, t0=t0, t1=t1, x0=spec.x0, x_end=spec.x_end)


def _resolve_steps(span: float, steps: int | None, h: float | None) -> int:
    if (steps is None) == (h is None):
        raise HTTPException(status_code=400, detail="give exactly one of steps and h")
    if steps is not None:
        if steps < 1:
            raise HTTPException(status_code=400, detail=f"steps must be >= 1, got {steps}")
        return steps
    if not h > 0:
        raise HTTPException(status_code=400, detail=f"h must be > 0, got {h}")
    if span == 0.0:
        return 0
    return max(1, round(span / h))


def _check_order(order: int) -> None:
    if not 1 <= order <= richardson.MAX_ORDER:
        raise HTTPException(
            status_code=400,
            detail=f"order out of range: {order} (must be 1..{richardson.MAX_ORDER})",
        )


@app.get("/healthz", response_model=HealthResponse)
def healthz() -> HealthResponse:
    return HealthResponse(status="ok")


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    p = _build(req.problem)
    _check_order(req.order)
    n = _resolve_steps(req.problem.x_end - req.problem.x0, req.steps, req.h)
    general = isinstance(p, GeneralProblem)
    with _mapped_errors():
        if general:
            if req.order == 1:
                tr = genlimits.general_euler(p, n)
                xs, cs, zs = tr.xs, tr.Cs, tr.Zs
            else:
                table = genlimits.general_solve(p, n, req.order)
                xs, cs, zs = table.xs, table.Ms, table.MZs
        elif req.order == 1:
            tr = euler_solve(p, n)
            xs, cs, zs = tr.xs, tr.Cs, tr.Zs
        else:
            table = richardson.extrapolate(p, n, req.order)
            xs, cs, zs = table.xs, table.Ms, table.MZs
    return SolveResponse(
        x=[float(v) for v in xs],
        c=[float(v) for v in cs],
        z=[float(v) for v in zs],
        c_end=float(cs[-1]),
        experimental=general,
    )


@app.post("/tune", response_model=TuneResponse)
def tune(req: TuneRequest) -> TuneResponse:
    p = _build(req.problem)
    if isinstance(p, GeneralProblem):
        raise HTTPException(status_code=400, detail="tuning supports plain problems only")
    with _mapped_errors():
        plan, table = control.tune_and_solve(p, req.tolerance, req.pilot)
    # JSON has no infinity; an unconstrained plan reports the planned h only.
    h_star = plan.h_star if math.isfinite(plan.h_star) else plan.h
    return TuneResponse(
        k4max=plan.k4max,
        h_star=h_star,
        n=plan.n,
        h=plan.h,
        flags=list(plan.flags),
        c_end=table.value,
    )


@app.post("/correct", response_model=CorrectResponse)
def correct_endpoint(req: CorrectRequest) -> CorrectResponse:
    p = _build(req.problem)
    if isinstance(p, GeneralProblem):
        raise HTTPException(status_code=400, detail="correction mode supports plain problems only")
    if req.rule != "simpson":
        raise HTTPException(status_code=400, detail=f"unknown rule '{req.rule}' (available: simpson)")
    _check_order(req.order)
    n = _resolve_steps(req.problem.x_end - req.problem.x0, req.steps, req.h)
    with _mapped_errors():
        rule = correct.simpson_rule(p)
        pc = correct.corrected_problem(p, rule)
        if req.order == 1:
            tr = euler_solve(pc, n)
            xs, cs = tr.xs, tr.Cs
        else:
            table = richardson.extrapolate(pc, n, req.order)
            xs, cs = table.xs, table.Ms
        qs = np.array([rule.q(float(x)).v for x in xs])
    return CorrectResponse(
        x=[float(v) for v in xs],
        q=[float(v) for v in qs],
        c=[float(v) for v in cs],
        q_plus_c=[float(v) for v in qs + cs],
        q_plus_c_end=float(qs[-1] + cs[-1]),
    )


@app.get("/coeffs/{order}", response_model=CoeffsResponse)
def coeffs(order: int) -> CoeffsResponse:
    with _mapped_errors():
        cv = richardson.coefficients(order)
    small = all(f.denominator <= 65536 for f in cv.exact)
    close = all(
        abs(float(f) - a) <= 1e-12 * max(1.0, abs(a))
        for f, a in zip(cv.exact, cv.alphas)
    )
    rationals = [str(f) for f in cv.exact] if small and close else None
    return CoeffsResponse(order=order, alphas=list(cv.alphas), rationals=rationals)
