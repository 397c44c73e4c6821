"""Closed-form expression DSL for rate and source functions.

A tiny language for functions of a single variable (``alpha`` or
``lambda``) built from +, -, *, /, ^ and the unary functions exp, ln,
sqrt, abs, sin.  Expressions are parsed into immutable trees, printed
back to parseable text, and evaluated either strictly (scalar, raising
on domain violations) or in a saturating vectorized mode used by the
grid estimators.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?          # '^' is right-associative
    base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base

Unary minus binds tighter than '^', i.e. ``-2^2`` is ``(-2)^2 = 4``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

VARIABLES = ("alpha", "lambda")
FUNCTIONS = ("exp", "ln", "sqrt", "abs", "sin")
BINARY_OPS = ("+", "-", "*", "/", "^")


class ExprError(ValueError):
    """Base class for expression-DSL failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier '{name}' at position {position}")
        self.name = name
        self.position = position


class DomainError(ExprError):
    """Evaluation left the real domain (ln/sqrt of a negative, etc.)."""


class UnboundVariableError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"variable '{name}' is not bound")
        self.name = name


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # neg, exp, ln, sqrt, abs, sin
    child: "FuncExpr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "FuncExpr"
    right: "FuncExpr"


FuncExpr = Const | Var | Unary | Binary

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_]+)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            at = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character '{text[at]}'", at)
        if m.end() == m.start():  # only whitespace remained
            break
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def expect_op(self, op: str):
        tok = self.peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            raise ExprSyntaxError(f"expected '{op}'", self.err_pos())
        self.next()

    def err_pos(self) -> int:
        tok = self.peek()
        return tok[2] if tok is not None else len(self.text)

    def parse(self) -> FuncExpr:
        node = self.expr()
        if self.peek() is not None:
            raise ExprSyntaxError("trailing input", self.err_pos())
        return node

    def expr(self) -> FuncExpr:
        node = self.term()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "+-":
            self.next()
            node = Binary(tok[1], node, self.term())
        return node

    def term(self) -> FuncExpr:
        node = self.factor()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "*/":
            self.next()
            node = Binary(tok[1], node, self.factor())
        return node

    def factor(self) -> FuncExpr:
        node = self.base()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.next()
            node = Binary("^", node, self.factor())  # right-associative
        return node

    def base(self) -> FuncExpr:
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError("expected a value", self.err_pos())
        kind, value, pos = tok
        if kind == "number":
            self.next()
            return Const(float(value))
        if kind == "ident":
            self.next()
            nxt = self.peek()
            if nxt and nxt[0] == "op" and nxt[1] == "(":
                if value not in FUNCTIONS:
                    raise UnknownIdentifierError(value, pos)
                self.next()
                arg = self.expr()
                self.expect_op(")")
                return Unary(value, arg)
            if value not in VARIABLES:
                raise UnknownIdentifierError(value, pos)
            return Var(value)
        if kind == "op" and value == "(":
            self.next()
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "op" and value == "-":
            self.next()
            return Unary("neg", self.base())
        raise ExprSyntaxError(f"expected a value, found '{value}'", pos)


def variables_of(expr: FuncExpr) -> set[str]:
    match expr:
        case Const():
            return set()
        case Var(name):
            return {name}
        case Unary(_, child):
            return variables_of(child)
        case Binary(_, left, right):
            return variables_of(left) | variables_of(right)
    raise TypeError(f"not a FuncExpr node: {expr!r}")


def parse_expr(text: str) -> FuncExpr:
    """Parse ``text`` into an expression tree.

    Raises ExprSyntaxError / UnknownIdentifierError on malformed input,
    and ExprError if the expression mixes both variables.
    """
    node = _Parser(text).parse()
    if len(variables_of(node)) > 1:
        raise ExprError("expression mixes 'alpha' and 'lambda'; use one variable")
    return node


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _prec(expr: FuncExpr) -> int:
    match expr:
        case Binary(op, _, _):
            return _PRECEDENCE[op]
        case Unary("neg", _):
            return 2  # prints like a product with -1
        case _:
            return 9


def to_string(expr: FuncExpr) -> str:
    """Render a tree back to text that re-parses to an equivalent tree."""
    match expr:
        case Const(v):
            if v == int(v) and abs(v) < 1e16:
                return str(int(v))
            return repr(v)
        case Var(name):
            return name
        case Unary("neg", child):
            inner = to_string(child)
            if _prec(child) < 3:
                inner = f"({inner})"
            return f"-{inner}"
        case Unary(op, child):
            return f"{op}({to_string(child)})"
        case Binary(op, left, right):
            lp, rp = _PRECEDENCE[op], _PRECEDENCE[op]
            ls = to_string(left)
            rs = to_string(right)
            # left child: parenthesize on lower precedence ('^' is right-assoc,
            # so equal precedence on the left needs parens too)
            if _prec(left) < lp or (op == "^" and _prec(left) == lp):
                ls = f"({ls})"
            # right child: lower precedence, or equal for left-assoc ops
            if _prec(right) < rp or (op in "+-*/" and _prec(right) == rp):
                rs = f"({rs})"
            # a leading unary minus on the right of '-' or '^' must be wrapped
            if isinstance(right, Unary) and right.op == "neg" and op in "-^":
                rs = f"({to_string(right)})"
            return f"{ls}{op}{rs}"
    raise TypeError(f"not a FuncExpr node: {expr!r}")


def eval_expr(expr: FuncExpr, binding: dict[str, float]) -> float:
    """Strict scalar evaluation.

    Domain violations (ln/sqrt of a nonpositive/negative, fractional
    powers of negatives) raise DomainError; overflow saturates to +/-inf.
    """
    match expr:
        case Const(v):
            return v
        case Var(name):
            if name not in binding:
                raise UnboundVariableError(name)
            return float(binding[name])
        case Unary(op, child):
            x = eval_expr(child, binding)
            if op == "neg":
                return -x
            if op == "exp":
                try:
                    return math.exp(x)
                except OverflowError:
                    return math.inf
            if op == "ln":
                if x <= 0:
                    raise DomainError(f"ln of nonpositive value {x}")
                return math.log(x)
            if op == "sqrt":
                if x < 0:
                    raise DomainError(f"sqrt of negative value {x}")
                return math.sqrt(x)
            if op == "abs":
                return abs(x)
            if op == "sin":
                return math.sin(x) if math.isfinite(x) else math.nan
        case Binary(op, left, right):
            a = eval_expr(left, binding)
            b = eval_expr(right, binding)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if b == 0:
                    if a == 0:
                        raise DomainError("0/0")
                    return math.copysign(math.inf, a) * math.copysign(1.0, b)
                return a / b
            if op == "^":
                try:
                    return math.pow(a, b)
                except OverflowError:
                    return math.inf
                except ValueError as exc:
                    raise DomainError(f"({a})^({b}) is not real") from exc
    raise TypeError(f"not a FuncExpr node: {expr!r}")


def eval_array(expr: FuncExpr, binding: dict[str, np.ndarray | float]):
    """Saturating vectorized evaluation used by grid estimators.

    Out-of-domain points become nan (or +/-inf where IEEE defines them);
    no exceptions are raised for numeric issues.
    """
    with np.errstate(all="ignore"):
        return _eval_array(expr, binding)


def _eval_array(expr: FuncExpr, binding):
    match expr:
        case Const(v):
            return v
        case Var(name):
            if name not in binding:
                raise UnboundVariableError(name)
            return np.asarray(binding[name], dtype=float)
        case Unary(op, child):
            x = _eval_array(child, binding)
            if op == "neg":
                return -x
            if op == "exp":
                return np.exp(x)
            if op == "ln":
                return np.log(x)
            if op == "sqrt":
                return np.sqrt(x)
            if op == "abs":
                return np.abs(x)
            if op == "sin":
                return np.sin(x)
        case Binary(op, left, right):
            a = _eval_array(left, binding)
            b = _eval_array(right, binding)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return a / b
            if op == "^":
                return np.power(a, b)
    raise TypeError(f"not a FuncExpr node: {expr!r}")
