"""Small scalar expression language with exact forward-mode derivatives.

Problem files describe each image component as one expression in the decision
variables ``x1..xn`` and the function-family parameter ``i``.  Evaluation is
plain IEEE double arithmetic; `eval_dual` carries an n-vector of derivatives
through every operation, so one pass yields the exact gradient.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, LexError, ParseError, UnknownIdentifier, VariableOutOfRange

FUNCTIONS = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "pow"}
_ARITY = {name: (2 if name == "pow" else 1) for name in FUNCTIONS}


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    line: int = field(compare=False)
    column: int = field(compare=False)


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    index: int  # 1-based


@dataclass(frozen=True)
class Param(Node):
    """The function-family index i, entering as a real constant."""


@dataclass(frozen=True)
class Neg(Node):
    child: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple


@dataclass(frozen=True)
class ExprAst:
    """Parsed expression plus the dimension it was parsed against."""

    root: Node
    n: int


@dataclass
class DualNumber:
    value: float
    derivatives: np.ndarray
    nondifferentiable: bool = False


# --- lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass
class _Token:
    kind: str   # num | ident | op | end
    text: str
    line: int
    column: int


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == m.start():
            # skip pure whitespace tail
            rest = source[pos:]
            if rest.strip() == "":
                break
            idx = pos + (len(rest) - len(rest.lstrip()))
            line = source.count("\n", 0, idx) + 1
            col = idx - (source.rfind("\n", 0, idx) + 1) + 1
            raise LexError(f"unexpected character {source[idx]!r}", line, col)
        start = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        line = source.count("\n", 0, start) + 1
        col = start - (source.rfind("\n", 0, start) + 1) + 1
        if m.group("num") is not None:
            kind, text = "num", m.group(0).strip()
        elif m.group("ident") is not None:
            kind, text = "ident", m.group("ident")
        else:
            kind, text = "op", m.group("op")
        tokens.append(_Token(kind, text, line, col))
        pos = m.end()
    last_line = source.count("\n") + 1
    tokens.append(_Token("end", "", last_line, len(source) - (source.rfind("\n") + 1) + 1))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, tokens, n):
        self.tokens = tokens
        self.k = 0
        self.n = n

    @property
    def tok(self):
        return self.tokens[self.k]

    def advance(self):
        self.k += 1

    def expect(self, text):
        t = self.tok
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.column)
        self.advance()

    def parse(self):
        node = self.expr()
        t = self.tok
        if t.kind != "end":
            raise ParseError(f"unexpected trailing input {t.text!r}", t.line, t.column)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.tok
            self.advance()
            node = BinOp(t.line, t.column, t.text, node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.tok
            self.advance()
            node = BinOp(t.line, t.column, t.text, node, self.power())
        return node

    def power(self):
        # unary minus binds tighter than ^; ^ is right-associative
        node = self.unary()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.tok
            self.advance()
            node = BinOp(t.line, t.column, "^", node, self.power())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            t = self.tok
            self.advance()
            return Neg(t.line, t.column, self.unary())
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(t.line, t.column, float(t.text))
        if t.kind == "ident":
            self.advance()
            name = t.text
            if name in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.tok.kind == "op" and self.tok.text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != _ARITY[name]:
                    raise ParseError(
                        f"{name} takes {_ARITY[name]} argument(s), got {len(args)}", t.line, t.column
                    )
                return Call(t.line, t.column, name, tuple(args))
            if name == "pi":
                return Const(t.line, t.column, math.pi)
            if name == "i":
                return Param(t.line, t.column)
            m = re.fullmatch(r"x(\d+)", name)
            if m:
                j = int(m.group(1))
                if not 1 <= j <= self.n:
                    raise VariableOutOfRange(
                        f"variable x{j} out of range for n={self.n}", t.line, t.column
                    )
                return Var(t.line, t.column, j)
            raise UnknownIdentifier(f"unknown identifier {name!r}", t.line, t.column)
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"expected a value, found {t.text or 'end of input'!r}", t.line, t.column)


def parse(source: str, n: int) -> ExprAst:
    """Parse one expression over x1..xn and the family parameter i."""
    return ExprAst(_Parser(_tokenize(source), n).parse(), n)


# --- printer ---------------------------------------------------------------

def to_source(ast: ExprAst) -> str:
    """Print an AST so that re-parsing yields a structurally identical tree."""
    return _print(ast.root)


def _print(node: Node) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Param):
        return "i"
    if isinstance(node, Neg):
        return f"(-{_print(node.child)})"
    if isinstance(node, BinOp):
        return f"({_print(node.left)} {node.op} {_print(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_print(a) for a in node.args)})"
    raise TypeError(node)


# --- evaluation ------------------------------------------------------------

def eval(ast: ExprAst, x, i: int) -> float:  # noqa: A001 - spec operation name
    """Evaluate at x with family index i."""
    x = np.asarray(x, dtype=float).ravel()
    return _eval(ast.root, x, float(i))


def _fail(node, message):
    raise DomainError(message, node.line, node.column)


def _eval(node, x, i):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x[node.index - 1]
    if isinstance(node, Param):
        return i
    if isinstance(node, Neg):
        return -_eval(node.child, x, i)
    if isinstance(node, BinOp):
        a = _eval(node.left, x, i)
        b = _eval(node.right, x, i)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if b == 0.0:
                _fail(node, "division by zero")
            return a / b
        return _pow_value(node, a, b)
    if isinstance(node, Call):
        args = [_eval(a, x, i) for a in node.args]
        return _call_value(node, args)
    raise TypeError(node)


def _pow_value(node, a, b):
    if a == 0.0 and b < 0.0:
        _fail(node, "zero raised to a negative power")
    if a < 0.0 and b != round(b):
        _fail(node, "negative base with non-integer exponent")
    return a ** b


def _call_value(node, args):
    name = node.name
    if name == "pow":
        return _pow_value(node, args[0], args[1])
    (v,) = args
    if name == "log":
        if v <= 0.0:
            _fail(node, "log of a non-positive value")
        return math.log(v)
    if name == "sqrt":
        if v < 0.0:
            _fail(node, "sqrt of a negative value")
        return math.sqrt(v)
    if name == "abs":
        return abs(v)
    return getattr(math, name)(v)


def eval_dual(ast: ExprAst, x, i: int) -> DualNumber:
    """Evaluate with the exact gradient with respect to x.

    `abs` at exactly 0 returns derivative 0 and sets the
    nondifferentiable flag instead of failing.
    """
    x = np.asarray(x, dtype=float).ravel()
    flag = [False]
    value, grad = _eval_dual(ast.root, x, float(i), flag)
    return DualNumber(value=value, derivatives=grad, nondifferentiable=flag[0])


def _eval_dual(node, x, i, flag):
    n = x.shape[0]
    if isinstance(node, Const):
        return node.value, np.zeros(n)
    if isinstance(node, Var):
        g = np.zeros(n)
        g[node.index - 1] = 1.0
        return x[node.index - 1], g
    if isinstance(node, Param):
        return i, np.zeros(n)
    if isinstance(node, Neg):
        v, g = _eval_dual(node.child, x, i, flag)
        return -v, -g
    if isinstance(node, BinOp):
        av, ag = _eval_dual(node.left, x, i, flag)
        bv, bg = _eval_dual(node.right, x, i, flag)
        if node.op == "+":
            return av + bv, ag + bg
        if node.op == "-":
            return av - bv, ag - bg
        if node.op == "*":
            return av * bv, av * bg + bv * ag
        if node.op == "/":
            if bv == 0.0:
                _fail(node, "division by zero")
            return av / bv, (ag * bv - av * bg) / (bv * bv)
        return _pow_dual(node, av, ag, bv, bg)
    if isinstance(node, Call):
        duals = [_eval_dual(a, x, i, flag) for a in node.args]
        return _call_dual(node, duals, flag)
    raise TypeError(node)


def _pow_dual(node, av, ag, bv, bg):
    value = _pow_value(node, av, bv)
    if np.any(bg != 0.0):
        if av <= 0.0:
            _fail(node, "non-constant exponent needs a positive base")
        grad = value * (bg * math.log(av) + bv * ag / av)
    else:
        if av == 0.0:
            if bv == 1.0:
                grad = ag.copy()
            elif bv > 1.0 or bv == 0.0:
                grad = np.zeros_like(ag)
            else:
                _fail(node, "derivative of x^b unbounded at x=0 for 0<b<1")
        else:
            grad = bv * av ** (bv - 1.0) * ag
    return value, grad


def _call_dual(node, duals, flag):
    name = node.name
    if name == "pow":
        (av, ag), (bv, bg) = duals
        return _pow_dual(node, av, ag, bv, bg)
    ((v, g),) = duals
    if name == "sin":
        return math.sin(v), math.cos(v) * g
    if name == "cos":
        return math.cos(v), -math.sin(v) * g
    if name == "tan":
        t = math.tan(v)
        return t, (1.0 + t * t) * g
    if name == "exp":
        e = math.exp(v)
        return e, e * g
    if name == "log":
        if v <= 0.0:
            _fail(node, "log of a non-positive value")
        return math.log(v), g / v
    if name == "sqrt":
        if v < 0.0:
            _fail(node, "sqrt of a negative value")
        if v == 0.0:
            _fail(node, "sqrt derivative at zero")
        s = math.sqrt(v)
        return s, g / (2.0 * s)
    if name == "abs":
        if v == 0.0:
            flag[0] = True
            return 0.0, np.zeros_like(g)
        return abs(v), math.copysign(1.0, v) * g
    raise TypeError(name)
