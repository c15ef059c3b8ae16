"""Single-variable arithmetic expressions and convexity kernels.

Grammar, loosest binding first::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' exponent)?
    exponent:= ('-' | '+') exponent | power          # right-associative
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' expr ')'

So ``-x^2`` is ``-(x^2)``, ``2^3^2`` is ``2^(3^2)`` and ``-x*y`` is
``(-x)*y``. Functions: sqrt, exp, log, abs (one argument), pow, min, max
(two arguments).

Evaluation works on numpy arrays so that quadrature and sampling can push
many points through a tree in one pass. Domain violations raise
:class:`~hmcx.errors.EvaluationDomainError` carrying the input point; NaN
and infinities never leak out.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import (
    ArityError,
    EvaluationDomainError,
    ExprSyntaxError,
    KernelError,
    UnknownIdentifierError,
)

__all__ = [
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "FunctionExpr",
    "Kernel",
    "parse",
    "evaluate",
    "to_text",
]


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Node", ...]


Node = Union[Const, Var, Neg, BinOp, Call]

FUNCTION_ARITY = {"sqrt": 1, "exp": 1, "log": 1, "abs": 1, "pow": 2, "min": 2, "max": 2}


# --------------------------------------------------------------------------
# tokenizer and parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", source, bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str, variable: str):
        self.source = source
        self.variable = variable
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, pos = self.peek()
        if value != text or kind == "end":
            found = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", self.source, pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {value!r}", self.source, pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "op" and value in ("-", "+"):
            self.advance()
            operand = self.unary()
            return Neg(operand) if value == "-" else operand
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.exponent())
        return base

    def exponent(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "op" and value in ("-", "+"):
            self.advance()
            operand = self.exponent()
            return Neg(operand) if value == "-" else operand
        return self.power()

    def atom(self) -> Node:
        kind, value, pos = self.advance()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                return self.call(value, pos)
            if value == self.variable:
                return Var(value)
            if value in FUNCTION_ARITY:
                raise ExprSyntaxError(f"function {value!r} requires arguments", self.source, pos)
            raise UnknownIdentifierError(
                f"unknown identifier {value!r} (the variable is {self.variable!r})", self.source, pos
            )
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"expected a number, name or '(', found {found}", self.source, pos)

    def call(self, name: str, pos: int) -> Node:
        if name not in FUNCTION_ARITY:
            raise UnknownIdentifierError(f"unknown function {name!r}", self.source, pos)
        self.expect("(")
        args = []
        if self.peek()[1] != ")":
            args.append(self.expr())
            while self.peek()[1] == "," and self.peek()[0] == "op":
                self.advance()
                args.append(self.expr())
        self.expect(")")
        want = FUNCTION_ARITY[name]
        if len(args) != want:
            raise ArityError(f"{name} takes {want} argument(s), got {len(args)}", self.source, pos)
        return Call(name, tuple(args))


# --------------------------------------------------------------------------
# evaluation


def _fail(message: str, bad: np.ndarray, points: np.ndarray, label: str | None):
    idx = int(np.flatnonzero(bad)[0])
    raise EvaluationDomainError(message, float(points.flat[idx]), label)


def _finite(values: np.ndarray, what: str, points: np.ndarray, label: str | None) -> np.ndarray:
    bad = ~np.isfinite(values)
    if bad.any():
        _fail(f"{what} produced a non-finite value", bad, points, label)
    return values


def _power(base: np.ndarray, expo: np.ndarray, points: np.ndarray, label: str | None) -> np.ndarray:
    neg_base = (base < 0) & (expo != np.round(expo))
    if neg_base.any():
        _fail("negative base raised to a non-integer power", neg_base, points, label)
    zero_neg = (base == 0) & (expo < 0)
    if zero_neg.any():
        _fail("zero raised to a negative power", zero_neg, points, label)
    with np.errstate(over="ignore", invalid="ignore"):
        return _finite(np.power(base, expo), "power", points, label)


def _eval(node: Node, pts: np.ndarray, label: str | None) -> np.ndarray:
    if isinstance(node, Var):
        return pts
    if isinstance(node, Const):
        return np.full(pts.shape, node.value)
    if isinstance(node, Neg):
        return -_eval(node.operand, pts, label)
    if isinstance(node, BinOp):
        lv = _eval(node.left, pts, label)
        rv = _eval(node.right, pts, label)
        op = node.op
        with np.errstate(over="ignore", invalid="ignore"):
            if op == "+":
                return _finite(lv + rv, "addition", pts, label)
            if op == "-":
                return _finite(lv - rv, "subtraction", pts, label)
            if op == "*":
                return _finite(lv * rv, "multiplication", pts, label)
            if op == "/":
                zero = rv == 0
                if zero.any():
                    _fail("division by zero", zero, pts, label)
                return _finite(lv / rv, "division", pts, label)
        return _power(lv, rv, pts, label)
    # Call
    args = [_eval(a, pts, label) for a in node.args]
    name = node.name
    if name == "sqrt":
        bad = args[0] < 0
        if bad.any():
            _fail("sqrt of a negative number", bad, pts, label)
        return np.sqrt(args[0])
    if name == "log":
        bad = args[0] <= 0
        if bad.any():
            _fail("log of a non-positive number", bad, pts, label)
        return np.log(args[0])
    if name == "exp":
        with np.errstate(over="ignore"):
            return _finite(np.exp(args[0]), "exp", pts, label)
    if name == "abs":
        return np.abs(args[0])
    if name == "pow":
        return _power(args[0], args[1], pts, label)
    if name == "min":
        return np.minimum(args[0], args[1])
    return np.maximum(args[0], args[1])


def _free_names(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Neg):
        return _free_names(node.operand)
    if isinstance(node, BinOp):
        return _free_names(node.left) | _free_names(node.right)
    out: set[str] = set()
    for a in node.args:
        out |= _free_names(a)
    return out


def to_text(node: Node) -> str:
    """Print a tree as fully parenthesised text that parses back to itself."""
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        text = repr(node.value)
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.name}({', '.join(to_text(a) for a in node.args)})"


@dataclass(frozen=True)
class FunctionExpr:
    """A parsed expression in one named variable.

    Call it with a float to get a float, or with an array to get an array.
    """

    root: Node
    source_text: str
    variable: str = "x"

    def __post_init__(self):
        extra = _free_names(self.root) - {self.variable}
        if extra:
            raise ValueError(f"expression uses variables {sorted(extra)} besides {self.variable!r}")

    def __call__(self, point, label: str | None = None):
        if np.ndim(point) == 0:
            return evaluate(self, float(point), label)
        pts = np.asarray(point, dtype=float)
        return _eval(self.root, pts, label)

    def __add__(self, other: "FunctionExpr") -> "FunctionExpr":
        if not isinstance(other, FunctionExpr):
            return NotImplemented
        root = BinOp("+", self.root, _rename(other.root, other.variable, self.variable))
        return FunctionExpr(root, f"({self.source_text}) + ({other.source_text})", self.variable)

    def scaled(self, factor: float) -> "FunctionExpr":
        root = BinOp("*", Const(float(factor)), self.root)
        return FunctionExpr(root, f"{float(factor)!r} * ({self.source_text})", self.variable)

    def text(self) -> str:
        return to_text(self.root)

    def __str__(self) -> str:
        return self.source_text


def _rename(node: Node, old: str, new: str) -> Node:
    if old == new:
        return node
    if isinstance(node, Var):
        return Var(new)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(_rename(node.operand, old, new))
    if isinstance(node, BinOp):
        return BinOp(node.op, _rename(node.left, old, new), _rename(node.right, old, new))
    return Call(node.name, tuple(_rename(a, old, new) for a in node.args))


def parse(source: str, variable_name: str = "x") -> FunctionExpr:
    """Parse ``source`` into a :class:`FunctionExpr` over ``variable_name``.

    >>> parse("x^2", "x")(3.0)
    9.0
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", str(source), 0)
    if variable_name in FUNCTION_ARITY:
        raise ValueError(f"{variable_name!r} is a function name")
    root = _Parser(source, variable_name).parse()
    return FunctionExpr(root, source, variable_name)


def evaluate(expr: FunctionExpr, point: float, label: str | None = None) -> float:
    point = float(point)
    if not np.isfinite(point):
        raise EvaluationDomainError("evaluation point is not finite", point, label)
    return float(_eval(expr.root, np.array([point]), label)[0])


# --------------------------------------------------------------------------
# kernels

KERNEL_PRESETS = ("identity", "one", "reciprocal", "power")

_KERNEL_GRID = np.linspace(0.0, 1.0, 1001)[1:-1]


@dataclass(frozen=True)
class Kernel:
    """The weight function h on (0, 1) that defines a convexity class.

    ``kind`` is ``identity`` (h(t)=t), ``one`` (h(t)=1), ``reciprocal``
    (h(t)=1/t), ``power`` (h(t)=t**s) or ``custom`` (an expression in t).
    Custom kernels are checked for definedness and non-negativity on a
    999-point interior grid when constructed. A kernel that vanishes
    identically is accepted; its class contains only f = 0.
    """

    kind: str
    s: float | None = None
    expr: FunctionExpr | None = None

    def __post_init__(self):
        if self.kind == "power":
            if self.s is None or not (0.0 < self.s <= 1.0):
                raise KernelError(f"power kernel needs s in (0, 1], got {self.s!r}")
        elif self.kind == "custom":
            if self.expr is None:
                raise KernelError("custom kernel needs an expression in t")
            try:
                vals = self.expr(_KERNEL_GRID)
            except EvaluationDomainError as exc:
                raise KernelError(f"custom kernel undefined on (0,1): {exc}") from exc
            neg = vals < 0
            if neg.any():
                t = float(_KERNEL_GRID[np.flatnonzero(neg)[0]])
                raise KernelError(f"custom kernel is negative at t={t!r}")
        elif self.kind not in KERNEL_PRESETS:
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        elif self.s is not None:
            raise KernelError(f"s is only meaningful for the power kernel, not {self.kind!r}")

    @classmethod
    def identity(cls) -> "Kernel":
        return cls("identity")

    @classmethod
    def one(cls) -> "Kernel":
        return cls("one")

    @classmethod
    def reciprocal(cls) -> "Kernel":
        return cls("reciprocal")

    @classmethod
    def power(cls, s: float) -> "Kernel":
        return cls("power", float(s))

    @classmethod
    def custom(cls, source: str | FunctionExpr) -> "Kernel":
        expr = parse(source, "t") if isinstance(source, str) else source
        return cls("custom", None, expr)

    @classmethod
    def from_text(cls, text: str) -> "Kernel":
        """Parse the flag syntax: identity, one, reciprocal, power:S or custom:EXPR."""
        text = text.strip()
        head, _, rest = text.partition(":")
        if head in ("identity", "one", "reciprocal") and not rest:
            return cls(head)
        if head == "power":
            try:
                s = float(rest)
            except ValueError:
                raise KernelError(f"power kernel needs a numeric exponent, got {rest!r}") from None
            return cls.power(s)
        if head == "custom" and rest.strip():
            return cls.custom(rest)
        raise KernelError(
            f"bad kernel {text!r}; use identity, one, reciprocal, power:S or custom:EXPR"
        )

    def text(self) -> str:
        if self.kind == "power":
            return f"power:{self.s!r}"
        if self.kind == "custom":
            return f"custom:{self.expr.source_text}"
        return self.kind

    def __call__(self, t, label: str | None = None):
        scalar = np.ndim(t) == 0
        pts = np.atleast_1d(np.asarray(t, dtype=float))
        label = label or "h"
        if self.kind == "custom":
            out = self.expr(pts, label)
        elif self.kind == "identity":
            out = pts.copy()
        elif self.kind == "one":
            out = np.ones_like(pts)
        elif self.kind == "reciprocal":
            zero = pts == 0
            if zero.any():
                _fail("division by zero", zero, pts, label)
            out = 1.0 / pts
        else:
            neg = pts < 0
            if neg.any():
                _fail("negative base raised to a non-integer power", neg, pts, label)
            out = np.power(pts, self.s)
        return float(out[0]) if scalar else out

    def as_callable(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda t: self(t)
