"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class ProblemSpec(BaseModel):
    """A double-integral problem; expressions use the library grammar."""

    f: str = Field(description="integrand f(x, t)")
    t0: str = Field(description="lower inner limit, expression in x")
    t1: str = Field(description="upper inner limit, expression in x")
    x0: float
    x_end: float
    a: Optional[str] = Field(default=None, description="lower outer limit (general mode)")
    b: Optional[str] = Field(default=None, description="upper outer limit (general mode)")


class SolveRequest(BaseModel):
    problem: ProblemSpec
    order: int = 4
    steps: Optional[int] = None
    h: Optional[float] = None


class SolveResponse(BaseModel):
    x: list[float]
    c: list[float]
    z: list[float]
    c_end: float
    experimental: bool = False


class TuneRequest(BaseModel):
    problem: ProblemSpec
    tolerance: float
    pilot: float = 0.01


class TuneResponse(BaseModel):
    k4max: float
    h_star: float
    n: int
    h: float
    flags: list[str]
    c_end: float


class CorrectRequest(BaseModel):
    problem: ProblemSpec
    order: int = 4
    steps: Optional[int] = None
    h: Optional[float] = None
    rule: str = "simpson"


class CorrectResponse(BaseModel):
    x: list[float]
    q: list[float]
    c: list[float]
    q_plus_c: list[float]
    q_plus_c_end: float


class CoeffsResponse(BaseModel):
    order: int
    alphas: list[float]
    rationals: Optional[list[str]] = None


class HealthResponse(BaseModel):
    status: str
