import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setopt import expr
from setopt.errors import (DomainError, LexError, ParseError,
                           UnknownIdentifier, VariableOutOfRange)


def test_parse_family_expression():
    ast = expr.parse("x1*exp(x1) + sin(2*pi*(i-1)/50)", n=1)
    v = expr.eval(ast, [2.3], 10)
    assert v == pytest.approx(23.8454, abs=5e-4)


def test_parse_error_trailing_operator():
    with pytest.raises(ParseError):
        expr.parse("x1 +", n=1)


def test_variable_out_of_range():
    with pytest.raises(VariableOutOfRange):
        expr.parse("x3", n=2)


def test_unknown_identifier_and_lex_error():
    with pytest.raises(UnknownIdentifier):
        expr.parse("foo + 1", n=1)
    with pytest.raises(LexError) as ei:
        expr.parse("x1 + $", n=1)
    assert ei.value.column == 6


def test_constants():
    assert expr.eval(expr.parse("3.5", 1), [0.0], 1) == 3.5
    assert expr.eval(expr.parse("pi", 1), [0.0], 1) == math.pi


def test_precedence():
    # unary minus binds tighter than ^, ^ right-associative
    assert expr.eval(expr.parse("-2^2", 1), [0.0], 1) == 4.0
    assert expr.eval(expr.parse("2^3^2", 1), [0.0], 1) == 512.0
    assert expr.eval(expr.parse("2+3*4", 1), [0.0], 1) == 14.0
    assert expr.eval(expr.parse("1-2-3", 1), [0.0], 1) == -4.0


def test_eval_dual_examples():
    d = expr.eval_dual(expr.parse("x1^2", 1), [3.0], 1)
    assert d.value == 9.0 and d.derivatives[0] == 6.0
    d = expr.eval_dual(expr.parse("x1*exp(x1) + sin(2*pi*(i-1)/50)", 1), [2.3], 1)
    assert d.derivatives[0] == pytest.approx((1 + 2.3) * math.exp(2.3), abs=1e-3)
    d = expr.eval_dual(expr.parse("x1*x2", 2), [2.0, 5.0], 1)
    assert np.array_equal(d.derivatives, [5.0, 2.0])


def test_domain_errors():
    with pytest.raises(DomainError):
        expr.eval(expr.parse("log(x1)", 1), [-1.0], 1)
    with pytest.raises(DomainError):
        expr.eval(expr.parse("sqrt(x1)", 1), [-1.0], 1)
    with pytest.raises(DomainError):
        expr.eval(expr.parse("1/x1", 1), [0.0], 1)
    with pytest.raises(DomainError):
        expr.eval(expr.parse("(-2)^0.5", 1), [0.0], 1)


def test_abs_kink_flag():
    d = expr.eval_dual(expr.parse("abs(x1)", 1), [0.0], 1)
    assert d.value == 0.0 and d.derivatives[0] == 0.0 and d.nondifferentiable
    d = expr.eval_dual(expr.parse("abs(x1)", 1), [-2.0], 1)
    assert d.value == 2.0 and d.derivatives[0] == -1.0 and not d.nondifferentiable


SOURCES = [
    "x1*exp(x1) + sin(2*pi*(i-1)/50)",
    "-x1^2 + pow(x2, 3) / (1 + x1*x2)",
    "cos(2*x1) + 1/(1+exp(2*x1))",
    "sqrt(abs(x2) + 1) - tan(x1/4)",
    "2^3^x1 - -x2",
]


@pytest.mark.parametrize("src", SOURCES)
def test_print_parse_roundtrip(src):
    ast = expr.parse(src, 2)
    printed = expr.to_source(ast)
    assert expr.parse(printed, 2).root == ast.root


def test_deterministic_eval():
    ast = expr.parse(SOURCES[0], 2)
    vals = {expr.eval(ast, [1.234, -0.5], 7) for _ in range(5)}
    assert len(vals) == 1


@settings(max_examples=80, deadline=None)
@given(x=st.floats(-3, 3), i=st.integers(1, 50))
def test_dual_matches_finite_difference(x, i):
    ast = expr.parse("x1*exp(x1) + sin(2*pi*(i-1)/50) + cos(2*x1)*x1", 1)
    h = 1e-6
    fd = (expr.eval(ast, [x + h], i) - expr.eval(ast, [x - h], i)) / (2 * h)
    d = expr.eval_dual(ast, [x], i)
    assert d.derivatives[0] == pytest.approx(fd, abs=1e-5 * (1 + abs(fd)))


def test_error_positions():
    with pytest.raises(ParseError) as ei:
        expr.parse("x1 + (x1 *", 1)
    assert ei.value.line == 1
    with pytest.raises(DomainError) as ei:
        expr.eval(expr.parse("1 + log(0 - x1)", 1), [1.0], 1)
    assert ei.value.column == 5
