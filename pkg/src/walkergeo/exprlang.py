"""Tiny arithmetic expression language over the chart coordinates u, v, x, y.

Grammar (EBNF):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" integer)?
    atom   := number | ident | ident "(" expr ")" | "(" expr ")"

Exponents are integer literals only, so differentiation through jets stays
exact.  Coordinate names are case-insensitive (U and u are the same symbol);
function names are exp, ln, sin, cos.  There is no implicit multiplication.

The AST is a tree of frozen dataclasses.  `parse` and `to_str` round-trip:
parse(to_str(e)) == e for every AST e produced by `parse`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

COORDS = ("u", "v", "x", "y")
FUNCTIONS = ("exp", "ln", "sin", "cos")


class ExprError(ValueError):
    """Parse or evaluation failure, with a byte offset into the source."""

    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at offset {pos})"
        super().__init__(message)
        self.pos = pos


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # canonical lowercase coordinate name


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Fn:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Bin, Pow, Fn]

_TOKEN_CHARS = set("+-*/^()")


def _tokenize(src: str) -> list[tuple[str, object, int]]:
    """Produce (kind, value, pos) triples; kinds: num, ident, op, end."""
    toks: list[tuple[str, object, int]] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_CHARS:
            toks.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            # optional exponent part of a float literal: 1e-3, 2.5E+4
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ExprError(f"bad number literal {text!r}", i)
            toks.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(("ident", src[i:j], i))
            i = j
            continue
        raise ExprError(f"unexpected character {ch!r}", i)
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def advance(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ExprError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ExprError("trailing input after expression", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                e = Bin(value, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                e = Bin(value, e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            exponent = self._integer()
            return Pow(base, exponent)
        return base

    def _integer(self) -> int:
        sign = 1
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            sign = -1
            kind, value, pos = self.peek()
        if kind != "num":
            raise ExprError("expected integer exponent after '^'", pos)
        if value != int(value):
            raise ExprError(f"non-integer exponent {value}", pos)
        self.advance()
        return sign * int(value)

    def atom(self) -> Expr:
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "ident":
            name = str(value)
            nkind, nvalue, _ = self.peek()
            if nkind == "op" and nvalue == "(":
                if name not in FUNCTIONS:
                    raise ExprError(f"unknown function {name!r}", pos)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Fn(name, arg)
            low = name.lower()
            if low not in COORDS:
                raise ExprError(f"unknown identifier {name!r}", pos)
            return Var(low)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprError("expected a number, coordinate, or '('", pos)


def parse(src: str) -> Expr:
    """Parse source text into an AST, raising ExprError on bad input."""
    return _Parser(src).parse()


# precedence levels for printing: higher binds tighter
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    if isinstance(e, Pow):
        return _PREC["pow"]
    return _PREC["atom"]


def to_str(e: Expr) -> str:
    """Render an AST back to parseable text (round-trip stable)."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_str(e.arg)
        if _prec(e.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Fn):
        return f"{e.name}({to_str(e.arg)})"
    if isinstance(e, Pow):
        base = to_str(e.base)
        if _prec(e.base) < _PREC["atom"]:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Bin):
        left, right = to_str(e.left), to_str(e.right)
        if _prec(e.left) < _PREC[e.op]:
            left = f"({left})"
        # operators parse left associative: a right child at the same
        # precedence level needs parens to reparse with the same shape
        if _prec(e.right) <= _PREC[e.op]:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an Expr: {e!r}")


def subst(e: Expr, table: dict[str, Expr]) -> Expr:
    """Replace coordinates by sub-expressions (capture-free, purely structural)."""
    if isinstance(e, Var):
        return table.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(subst(e.arg, table))
    if isinstance(e, Bin):
        return Bin(e.op, subst(e.left, table), subst(e.right, table))
    if isinstance(e, Pow):
        return Pow(subst(e.base, table), e.exponent)
    if isinstance(e, Fn):
        return Fn(e.name, subst(e.arg, table))
    raise TypeError(f"not an Expr: {e!r}")


def evaluate(e: Expr, env):
    """Evaluate over any arithmetic ring.

    `env` maps coordinate names to ring elements.  The ring must support
    + - * /, integer **, and (for Fn nodes) provide exp/ln/sin/cos either
    as methods or via the math module for plain floats.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -evaluate(e.arg, env)
    if isinstance(e, Bin):
        lhs, rhs = evaluate(e.left, env), evaluate(e.right, env)
        if e.op == "+":
            return lhs + rhs
        if e.op == "-":
            return lhs - rhs
        if e.op == "*":
            return lhs * rhs
        if e.op == "/":
            return lhs / rhs
        raise ExprError(f"bad operator {e.op!r}")
    if isinstance(e, Pow):
        return evaluate(e.base, env) ** e.exponent
    if isinstance(e, Fn):
        arg = evaluate(e.arg, env)
        fn = getattr(arg, e.name, None)
        if fn is not None:
            return fn()
        import math

        return getattr(math, {"ln": "log"}.get(e.name, e.name))(arg)
    raise TypeError(f"not an Expr: {e!r}")
