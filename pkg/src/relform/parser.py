"""Recursive-descent parser for the polynomial expression grammar.

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := ('+' | '-') factor | atom ('^' INT)?
    atom   := NUMBER ('/' NUMBER)? | NAME | '(' expr ')'

Products are evaluated left to right in the graded-commutative ring, so
``d_x2*d_x1`` parses to ``-d_x1*d_x2`` when both are odd.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .graded import GradedContext, GradedPoly

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the pattern always matches
            raise ParseError(f"cannot tokenize at {pos}")
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", int(num)))
        elif name is not None:
            tokens.append(("name", name))
        elif op is not None and not op.isspace():
            if op not in "+-*/^()":
                raise ParseError(f"unexpected character {op!r} at {m.start(3)}")
            tokens.append(("op", op))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, ctx: GradedContext, text: str):
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind}, got {tok[1]!r}")
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self) -> GradedPoly:
        out = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> GradedPoly:
        out = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            out = out * self.factor()
        return out

    def factor(self) -> GradedPoly:
        if self.peek() == ("op", "-"):
            self.take()
            return -self.factor()
        if self.peek() == ("op", "+"):
            self.take()
            return self.factor()
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            base = base ** self.take("num")[1]
        return base

    def atom(self) -> GradedPoly:
        kind, val = self.peek()
        if kind == "num":
            self.take()
            value = Fraction(val)
            if self.peek() == ("op", "/"):
                self.take()
                den = self.take("num")[1]
                if den == 0:
                    raise ParseError("zero denominator")
                value = value / den
            return self.ctx.const(value)
        if kind == "name":
            self.take()
            if val not in self.ctx.names:
                raise ParseError(f"undeclared variable {val!r}")
            return self.ctx.var(val)
        if (kind, val) == ("op", "("):
            self.take()
            out = self.expr()
            self.take("op", ")")
            return out
        raise ParseError(f"unexpected token {val!r}")


def parse_poly(ctx: GradedContext, text: str) -> GradedPoly:
    p = _Parser(ctx, text)
    out = p.expr()
    if p.peek()[0] != "end":
        raise ParseError(f"trailing input at token {p.peek()[1]!r}")
    return out
