"""Expression language: grammar, evaluation, and order-2 jet derivatives."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from richcub import (
    DomainEvalError,
    ExprSyntaxError,
    Jet2,
    eval_jet,
    evaluate,
    parse,
    to_src,
)
from richcub.expr import Add, Call, Div, Mul, Neg, Num, Pow, Sub, Var, checked_jet_eval, jet_eval


# ---------------------------------------------------------------- parsing


def test_ast_power_plus_one():
    assert parse("x^2 + 1") == Add(Pow(Var("x"), Num(2.0)), Num(1.0))


def test_ast_sin_product():
    assert parse("sin(x*t)") == Call("sin", Mul(Var("x"), Var("t")))


def test_incomplete_expression_offset():
    with pytest.raises(ExprSyntaxError) as exc:
        parse("x +")
    assert exc.value.offset == 3
    assert "offset 3" in str(exc.value)


def test_unary_minus_binds_looser_than_power():
    assert evaluate(parse("-2^2"), 0.0, 0.0) == -4.0


def test_power_is_right_associative():
    # 2^(3^2) = 512, not (2^3)^2 = 64. The exponent is itself a Pow node, so
    # evaluation goes through exp(ln 2 * 9) and is exact only to rounding.
    assert parse("2^3^2") == Pow(Num(2.0), Pow(Num(3.0), Num(2.0)))
    assert evaluate(parse("2^3^2"), 0.0, 0.0) == pytest.approx(512.0, rel=1e-14)


def test_precedence_mul_over_add():
    assert evaluate(parse("2 + 3 * 4"), 0.0, 0.0) == 14.0


def test_scientific_literals():
    assert parse("6.3e-4") == Num(6.3e-4)
    assert parse(".5") == Num(0.5)


def test_unknown_identifier_rejected():
    with pytest.raises(ExprSyntaxError, match="unknown identifier 'y'"):
        parse("x + y")


def test_unknown_function_rejected():
    with pytest.raises(ExprSyntaxError, match="unknown function 'sinh'"):
        parse("sinh(x)")


def test_no_implicit_multiplication():
    with pytest.raises(ExprSyntaxError):
        parse("2x")


def test_empty_source_rejected():
    with pytest.raises(ExprSyntaxError, match="expected a value"):
        parse("")


def test_unbalanced_paren_rejected():
    with pytest.raises(ExprSyntaxError, match=r"expected '\)'"):
        parse("sin(x")


def test_parenthesized_grouping():
    assert evaluate(parse("(2 + 3) * 4"), 0.0, 0.0) == 20.0


# ------------------------------------------------------------- evaluation


def test_eval_polynomial():
    assert evaluate(parse("x^2+1"), 2.0, 0.0) == 5.0


def test_eval_sin_product():
    v = evaluate(parse("sin(x*t)"), 1.0, 2.0)
    assert v == math.sin(2.0)
    assert abs(v - 0.909297426825682) < 1e-15


def test_eval_division_by_zero_is_domain_error():
    with pytest.raises(DomainEvalError) as exc:
        evaluate(parse("1/x"), 0.0, 0.0)
    assert exc.value.x == 0.0
    assert exc.value.t == 0.0


def test_eval_ln_nonpositive_is_domain_error():
    with pytest.raises(DomainEvalError):
        evaluate(parse("ln(x - 10)"), 2.0, 0.0)


def test_eval_sqrt_negative_is_domain_error():
    with pytest.raises(DomainEvalError):
        evaluate(parse("sqrt(t)"), 0.0, -1.0)


def test_eval_all_functions():
    x = 0.7
    e = parse("sin(x) + cos(x) + tan(x) + exp(x) + ln(x) + sqrt(x) + abs(x)")
    expected = (
        math.sin(x) + math.cos(x) + math.tan(x) + math.exp(x)
        + math.log(x) + math.sqrt(x) + abs(x)
    )
    assert evaluate(e, x, 0.0) == pytest.approx(expected, rel=1e-15)


def test_integer_power_is_repeated_multiplication():
    # Negative base with integer exponent must not route through exp/ln.
    assert evaluate(parse("x^3"), -2.0, 0.0) == -8.0
    assert evaluate(parse("x^8"), -2.0, 0.0) == 256.0


def test_noninteger_power_inherits_ln_domain():
    assert evaluate(parse("x^0.5"), 4.0, 0.0) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(DomainEvalError):
        evaluate(parse("x^0.5"), -4.0, 0.0)


# -------------------------------------------------------------------- jets


def test_jet_polynomial():
    j = eval_jet(parse("x^2+1"), "x", 3.0, 0.0)
    assert (j.v, j.d1, j.d2) == (10.0, 6.0, 2.0)


def test_jet_linear():
    j = eval_jet(parse("x/5"), "x", 4.0, 0.0)
    assert (j.v, j.d1, j.d2) == (0.8, 0.2, 0.0)


def test_jet_sin_product_closed_form():
    j = eval_jet(parse("sin(x*t)"), "x", 1.0, 2.0)
    assert j.v == pytest.approx(math.sin(2.0), abs=1e-15)
    assert j.d1 == pytest.approx(2.0 * math.cos(2.0), abs=1e-14)
    assert j.d2 == pytest.approx(-4.0 * math.sin(2.0), abs=1e-14)


def test_jet_sin_product_vs_finite_differences():
    e = parse("sin(x*t)")
    h = 1e-5
    f = lambda u: evaluate(e, u, 2.0)
    fd1 = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h)
    j = eval_jet(e, "x", 1.0, 2.0)
    assert abs(j.d1 - fd1) < 1e-8


def test_jet_seed_t():
    j = eval_jet(parse("x*t^2"), "t", 3.0, 2.0)
    assert (j.v, j.d1, j.d2) == (12.0, 12.0, 6.0)


def test_jet_seed_validation():
    with pytest.raises(ValueError):
        eval_jet(parse("x"), "u", 1.0, 0.0)


def test_jet_value_matches_eval_exactly():
    for src, x, t in [
        ("sin(x*t) / (1 + x^2)", 1.3, 0.7),
        ("exp(x) * cos(t) - x/t", 0.9, 2.4),
        ("sqrt(x^2 + t^2)", 3.0, 4.0),
    ]:
        e = parse(src)
        assert eval_jet(e, "x", x, t).v == evaluate(e, x, t)


def test_jet2_multiplication_rule():
    u = Jet2(2.0, 3.0, 4.0)
    w = Jet2(5.0, 6.0, 7.0)
    p = u * w
    assert p.v == 2.0 * 5.0
    assert p.d1 == 3.0 * 5.0 + 2.0 * 6.0
    assert p.d2 == 4.0 * 5.0 + 2.0 * 3.0 * 6.0 + 2.0 * 7.0


def test_jet2_division_consistent_with_multiplication():
    u = Jet2(2.0, 3.0, 4.0)
    w = Jet2(5.0, 6.0, 7.0)
    q = u / w
    r = q * w
    assert r.v == pytest.approx(u.v, rel=1e-15)
    assert r.d1 == pytest.approx(u.d1, rel=1e-15)
    assert r.d2 == pytest.approx(u.d2, rel=1e-15)


def test_jet_constants_and_seeds():
    j = eval_jet(parse("7.5"), "x", 100.0, 0.0)
    assert (j.v, j.d1, j.d2) == (7.5, 0.0, 0.0)
    j = eval_jet(parse("x"), "x", 100.0, 0.0)
    assert (j.v, j.d1, j.d2) == (100.0, 1.0, 0.0)


def test_jet_array_broadcast():
    e = parse("sin(x*t)")
    ts = np.linspace(0.2, 5.0, 11)
    out = jet_eval(e, Jet2(1.5, 1.0), Jet2(ts))
    assert out.v.shape == ts.shape
    np.testing.assert_allclose(out.v, np.sin(1.5 * ts), rtol=1e-15)
    np.testing.assert_allclose(out.d1, ts * np.cos(1.5 * ts), rtol=1e-14, atol=1e-16)


def test_checked_jet_eval_array_reports_first_bad_node():
    e = parse("ln(t)")
    ts = np.array([2.0, 1.0, -1.0, 3.0])
    with pytest.raises(DomainEvalError) as exc:
        checked_jet_eval(e, Jet2(0.0), Jet2(ts))
    assert exc.value.t == -1.0


# ----------------------------------------------------- pretty-print round-trip


SOURCES = [
    "x^2 + 1",
    "sin(x*t)",
    "-x + t",
    "x - (t - 1)",
    "x / (t / 2)",
    "2^3^2",
    "-(x*t)^2",
    "x^-2",
    "sqrt(abs(x)) * exp(-t)",
    "1/(1+x^2)",
    "x*t - t/5 + 0.25",
]


@pytest.mark.parametrize("src", SOURCES)
def test_roundtrip_ast_identity(src):
    e = parse(src)
    assert parse(to_src(e)) == e


@pytest.mark.parametrize("src", SOURCES)
def test_roundtrip_evaluation_identical(src):
    e = parse(src)
    e2 = parse(to_src(e))
    rng = np.random.default_rng(42)
    for _ in range(100):
        x = float(rng.uniform(0.3, 3.0))
        t = float(rng.uniform(0.3, 3.0))
        assert evaluate(e2, x, t) == evaluate(e, x, t)


# ------------------------------------------------------ derivative property


def _exprs(depth: int):
    """Random ASTs of bounded depth over smooth, everywhere-safe operations."""
    leaf = st.one_of(
        st.just(Var("x")),
        st.just(Var("t")),
        st.floats(min_value=-2.0, max_value=2.0).map(lambda v: Num(round(v, 3))),
    )
    def extend(children):
        unary = children.flatmap(
            lambda a: st.sampled_from(
                [Neg(a), Call("sin", a), Call("cos", a), Call("exp", a)]
            )
        )
        binary = st.tuples(children, children, st.sampled_from("+-*")).map(
            lambda abo: {"+": Add, "-": Sub, "*": Mul}[abo[2]](abo[0], abo[1])
        )
        return st.one_of(children, unary, binary)
    return st.recursive(leaf, extend, max_leaves=2 ** depth)


@given(
    e=_exprs(4),
    x=st.floats(min_value=-1.5, max_value=1.5),
    t=st.floats(min_value=-1.5, max_value=1.5),
)
def test_jet_matches_finite_differences(e, x, t):
    j = eval_jet(e, "x", x, t)
    assume(abs(j.v) < 1e6 and abs(j.d1) < 1e6 and abs(j.d2) < 1e6)

    def f(u):
        return evaluate(e, u, t)

    h1 = 1e-5
    fd1 = (f(x + h1) - f(x - h1)) / (2.0 * h1)
    assert abs(j.d1 - fd1) <= 1e-6 * max(1.0, abs(j.d1))

    h2 = 1e-4
    fd2 = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2)
    assert abs(j.d2 - fd2) <= 1e-4 * max(1.0, abs(j.d2))


@given(
    e=_exprs(4),
    x=st.floats(min_value=-1.5, max_value=1.5),
    t=st.floats(min_value=-1.5, max_value=1.5),
)
def test_jet_value_equals_eval(e, x, t):
    assert eval_jet(e, "x", x, t).v == evaluate(e, x, t)
