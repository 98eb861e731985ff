"""Scalar math expressions over the variables x and t.

Parsing produces an immutable AST; evaluation propagates order-2 jets
(value, first, second derivative) so that limit derivatives and integrand
x-derivatives come out of the same tree walk that computes values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainEvalError, ExprSyntaxError

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "abs")

# Literal integer exponents up to this magnitude are expanded into repeated
# multiplication; larger or non-integer exponents go through exp(ln(b)*e).
_MAX_INT_POW = 8


@dataclass(frozen=True)
class Num:
    v: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "t"


@dataclass(frozen=True)
class Neg:
    a: "Expr"


@dataclass(frozen=True)
class Add:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Sub:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Mul:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Div:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Pow:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    a: "Expr"


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]

_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def _byte_offset(self, pos: int) -> int:
        return len(self.src[:pos].encode("utf-8"))

    def _error(self, message: str, pos: int | None = None):
        at = self.pos if pos is None else pos
        raise ExprSyntaxError(message, self._byte_offset(at))

    def _skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos] in " \t\r\n":
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def _accept(self, ch: str) -> bool:
        if self._peek() == ch:
            self.pos += 1
            return True
        return False

    def _expect(self, ch: str):
        if not self._accept(ch):
            self._error(f"expected '{ch}'")

    def parse(self) -> Expr:
        e = self.expr()
        self._skip_ws()
        if self.pos < len(self.src):
            self._error("unexpected trailing input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self._accept("+"):
                e = Add(e, self.term())
            elif self._accept("-"):
                e = Sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            if self._accept("*"):
                e = Mul(e, self.factor())
            elif self._accept("/"):
                e = Div(e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        if self._accept("-"):
            inner = self.power()
            if isinstance(inner, Num):
                return Num(-inner.v)
            return Neg(inner)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self._accept("^"):
            return Pow(base, self.factor())
        return base

    def atom(self) -> Expr:
        self._skip_ws()
        if self.pos >= len(self.src):
            self._error("expected a value")
        ch = self.src[self.pos]
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self._expect(")")
            return e
        m = _NUMBER.match(self.src, self.pos)
        if m:
            self.pos = m.end()
            return Num(float(m.group(0)))
        m = _IDENT.match(self.src, self.pos)
        if m:
            name = m.group(0)
            start = self.pos
            self.pos = m.end()
            if name in ("x", "t"):
                return Var(name)
            if name in FUNCTIONS:
                if self._peek() != "(":
                    self._error(f"expected '(' after function '{name}'")
                self.pos += 1
                arg = self.expr()
                self._expect(")")
                return Call(name, arg)
            if self._peek() == "(":
                self._error(f"unknown function '{name}'", start)
            self._error(f"unknown identifier '{name}'", start)
        self._error("expected a value")


def parse(src: str) -> Expr:
    """Parse an expression over x and t. Raises ExprSyntaxError with a byte offset."""
    return _Parser(src).parse()


_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num):
        return _PREC_ATOM if e.v >= 0 else _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _emit(e: Expr, min_prec: int) -> str:
    # Child min_prec values are chosen so parse(to_src(e)) rebuilds the
    # identical tree (associativity and unary binding preserved).
    if isinstance(e, Num):
        s = repr(e.v)
    elif isinstance(e, Var):
        s = e.name
    elif isinstance(e, Call):
        s = f"{e.fn}({_emit(e.a, _PREC_ADD)})"
    elif isinstance(e, Neg):
        s = "-" + _emit(e.a, _PREC_POW)
    elif isinstance(e, Add):
        s = _emit(e.a, _PREC_ADD) + " + " + _emit(e.b, _PREC_MUL)
    elif isinstance(e, Sub):
        s = _emit(e.a, _PREC_ADD) + " - " + _emit(e.b, _PREC_MUL)
    elif isinstance(e, Mul):
        s = _emit(e.a, _PREC_MUL) + "*" + _emit(e.b, _PREC_NEG)
    elif isinstance(e, Div):
        s = _emit(e.a, _PREC_MUL) + "/" + _emit(e.b, _PREC_NEG)
    elif isinstance(e, Pow):
        s = _emit(e.a, _PREC_ATOM) + "^" + _emit(e.b, _PREC_NEG)
    else:
        raise TypeError(f"not an Expr node: {e!r}")
    if _prec(e) < min_prec:
        return "(" + s + ")"
    return s


def to_src(e: Expr) -> str:
    """Render the AST back to source; parse(to_src(e)) == e."""
    return _emit(e, 0)


class Jet2:
    """Order-2 jet: value, first and second derivative w.r.t. one variable.

    Components are floats or numpy arrays (broadcastable mixes allowed).
    """

    __slots__ = ("v", "d1", "d2")

    def __init__(self, v, d1=0.0, d2=0.0):
        self.v = v
        self.d1 = d1
        self.d2 = d2

    def __repr__(self):
        return f"Jet2(v={self.v!r}, d1={self.d1!r}, d2={self.d2!r})"

    def __add__(self, o: "Jet2") -> "Jet2":
        return Jet2(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    def __sub__(self, o: "Jet2") -> "Jet2":
        return Jet2(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.v, -self.d1, -self.d2)

    def __mul__(self, o: "Jet2") -> "Jet2":
        return Jet2(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )

    def __truediv__(self, o: "Jet2") -> "Jet2":
        # np.true_divide gives IEEE inf/nan for zero divisors even on Python
        # floats, so domain failures surface via the finiteness check instead
        # of ZeroDivisionError.
        q = np.true_divide(self.v, o.v)
        q1 = np.true_divide(self.d1 - q * o.d1, o.v)
        q2 = np.true_divide(self.d2 - 2.0 * q1 * o.d1 - q * o.d2, o.v)
        return Jet2(q, q1, q2)


def _jet_fn(name: str, u: Jet2) -> Jet2:
    v, d1, d2 = u.v, u.d1, u.d2
    if name == "sin":
        s, c = np.sin(v), np.cos(v)
        return Jet2(s, c * d1, c * d2 - s * d1 * d1)
    if name == "cos":
        s, c = np.sin(v), np.cos(v)
        return Jet2(c, -s * d1, -s * d2 - c * d1 * d1)
    if name == "tan":
        tn = np.tan(v)
        w = 1.0 + tn * tn
        return Jet2(tn, w * d1, w * d2 + 2.0 * tn * w * d1 * d1)
    if name == "exp":
        ev = np.exp(v)
        return Jet2(ev, ev * d1, ev * d2 + ev * d1 * d1)
    if name == "ln":
        r1 = np.true_divide(d1, v)
        return Jet2(np.log(v), r1, np.true_divide(d2, v) - r1 * r1)
    if name == "sqrt":
        s = np.sqrt(v)
        return Jet2(
            s,
            np.true_divide(d1, 2.0 * s),
            np.true_divide(d2, 2.0 * s) - np.true_divide(d1 * d1, 4.0 * s * s * s),
        )
    if name == "abs":
        sg = np.sign(v)
        return Jet2(np.abs(v), sg * d1, sg * d2)
    raise ValueError(f"unknown function '{name}'")


def _int_pow(base: Jet2, k: int) -> Jet2:
    if k == 0:
        return Jet2(np.ones_like(base.v) if isinstance(base.v, np.ndarray) else 1.0)
    out = base
    for _ in range(abs(k) - 1):
        out = out * base
    if k < 0:
        one = Jet2(np.ones_like(base.v) if isinstance(base.v, np.ndarray) else 1.0)
        return one / out
    return out


def jet_eval(e: Expr, xj: Jet2, tj: Jet2) -> Jet2:
    """Evaluate e with the given jets bound to x and t. No finiteness check."""
    if isinstance(e, Num):
        return Jet2(e.v)
    if isinstance(e, Var):
        return xj if e.name == "x" else tj
    if isinstance(e, Neg):
        return -jet_eval(e.a, xj, tj)
    if isinstance(e, Add):
        return jet_eval(e.a, xj, tj) + jet_eval(e.b, xj, tj)
    if isinstance(e, Sub):
        return jet_eval(e.a, xj, tj) - jet_eval(e.b, xj, tj)
    if isinstance(e, Mul):
        return jet_eval(e.a, xj, tj) * jet_eval(e.b, xj, tj)
    if isinstance(e, Div):
        return jet_eval(e.a, xj, tj) / jet_eval(e.b, xj, tj)
    if isinstance(e, Pow):
        base = jet_eval(e.a, xj, tj)
        if isinstance(e.b, Num) and float(e.b.v).is_integer() and abs(e.b.v) <= _MAX_INT_POW:
            return _int_pow(base, int(e.b.v))
        expo = jet_eval(e.b, xj, tj)
        return _jet_fn("exp", _jet_fn("ln", base) * expo)
    if isinstance(e, Call):
        return _jet_fn(e.fn, jet_eval(e.a, xj, tj))
    raise TypeError(f"not an Expr node: {e!r}")


def _all_finite(j: Jet2) -> bool:
    return bool(np.all(np.isfinite(j.v)) and np.all(np.isfinite(j.d1)) and np.all(np.isfinite(j.d2)))


def _first_bad(j: Jet2, x, t):
    # Report the offending point; for array-valued t, pick the first bad node.
    if isinstance(t, np.ndarray):
        bad = ~(np.isfinite(np.broadcast_to(j.v, t.shape))
                & np.isfinite(np.broadcast_to(j.d1, t.shape))
                & np.isfinite(np.broadcast_to(j.d2, t.shape)))
        idx = int(np.argmax(bad))
        return x, float(t[idx])
    return x, t


def checked_jet_eval(e: Expr, xj: Jet2, tj: Jet2) -> Jet2:
    """jet_eval plus a finiteness check raising DomainEvalError."""
    with np.errstate(all="ignore"):
        out = jet_eval(e, xj, tj)
    if not _all_finite(out):
        x, t = _first_bad(out, xj.v, tj.v)
        raise DomainEvalError("expression evaluated to a non-finite value", x, t)
    return out


def evaluate(e: Expr, x: float, t: float) -> float:
    """IEEE double value of e at (x, t)."""
    out = checked_jet_eval(e, Jet2(x), Jet2(t))
    return float(out.v)


def eval_jet(e: Expr, seed: str, x: float, t: float) -> Jet2:
    """Value and first/second derivative of e w.r.t. the seeded variable.

    The other variable is held fixed. Derivatives are exact jet propagation,
    not finite differences.
    """
    if seed not in ("x", "t"):
        raise ValueError("seed must be 'x' or 't'")
    xj = Jet2(x, 1.0 if seed == "x" else 0.0)
    tj = Jet2(t, 1.0 if seed == "t" else 0.0)
    out = checked_jet_eval(e, xj, tj)
    return Jet2(float(out.v), float(out.d1), float(out.d2))
