"""Operators whose coefficients are polynomials in undetermined graph weights.

A :class:`WeightedOp` maps a weight monomial (a sorted tuple of weight keys,
``()`` for the exact part) to a :class:`MultiDiffOp` with rational
coefficients.  Symbolic cancellation therefore happens before any number is
plugged in; numeric evaluation propagates the weights' standard errors to
first order, treating distinct weights as independent.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .graded import GradedContext, GradedPoly
from .hochschild import MultiDiffOp, compose_at, format_op


def _merge(k1: tuple, k2: tuple) -> tuple:
    return tuple(sorted(k1 + k2, key=repr))


class WeightedOp:
    __slots__ = ("ctx", "parts")

    def __init__(self, ctx: GradedContext, parts: Mapping | None = None):
        self.ctx = ctx
        self.parts = {k: v for k, v in (parts or {}).items() if not v.is_zero()}

    @classmethod
    def exact(cls, op: MultiDiffOp) -> "WeightedOp":
        return cls(op.ctx, {(): op})

    def __add__(self, other: "WeightedOp") -> "WeightedOp":
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out[k] + v if k in out else v
        return WeightedOp(self.ctx, out)

    def __neg__(self):
        return WeightedOp(self.ctx, {k: -v for k, v in self.parts.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return WeightedOp(self.ctx, {k: v * c for k, v in self.parts.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, WeightedOp) and self.parts == other.parts

    def is_zero(self) -> bool:
        return not self.parts

    def keys(self) -> set:
        return {w for k in self.parts for w in k}

    def map(self, fn: Callable[[MultiDiffOp], MultiDiffOp]) -> "WeightedOp":
        return WeightedOp(self.ctx, {k: fn(v) for k, v in self.parts.items()})

    def component(self, arity: int | None = None) -> "WeightedOp":
        return self.map(lambda op: op.component(arity))

    def arities(self) -> set:
        return set().union(*(v.arities() for v in self.parts.values())) if self.parts else set()

    def substitute(self, exact_values: Mapping) -> "WeightedOp":
        """Fold keys with known rational values into the exact part."""
        out = WeightedOp(self.ctx)
        for k, op in self.parts.items():
            c = Fraction(1)
            rest = []
            for w in k:
                if w in exact_values:
                    c *= exact_values[w]
                else:
                    rest.append(w)
            out = out + WeightedOp(self.ctx, {tuple(rest): op * c})
        return out

    def __str__(self):
        if not self.parts:
            return "0"
        return "\n".join(f"[{' '.join(map(str, k)) or 'exact'}] {format_op(v)}" for k, v in self.parts.items())


def wcompose(phi: WeightedOp, slot: int, psi: WeightedOp) -> WeightedOp:
    out = WeightedOp(phi.ctx)
    for k1, a in phi.parts.items():
        for k2, b in psi.parts.items():
            out = out + WeightedOp(phi.ctx, {_merge(k1, k2): compose_at(a, slot, b)})
    return out


def wbilinear(f: Callable, a: WeightedOp, b: WeightedOp) -> WeightedOp:
    """Extend a bilinear map on operators to weighted operators."""
    out = WeightedOp(a.ctx)
    for k1, x in a.parts.items():
        for k2, y in b.parts.items():
            out = out + WeightedOp(a.ctx, {_merge(k1, k2): f(x, y)})
    return out


class NumericResult:
    """Float coefficients with standard errors, keyed like the exact objects."""

    __slots__ = ("values", "variances", "formatter")

    def __init__(self, values: dict, variances: dict, formatter: Callable = str):
        self.values = values
        self.variances = variances
        self.formatter = formatter

    def error(self, key) -> float:
        return math.sqrt(self.variances.get(key, 0.0))

    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)

    def max_sigma_ratio(self) -> float:
        """Largest ``|value| / error`` (``inf`` for a nonzero value with no error)."""
        worst = 0.0
        for k, v in self.values.items():
            e = self.error(k)
            if e == 0.0:
                if abs(v) > 1e-12:
                    return math.inf
                continue
            worst = max(worst, abs(v) / e)
        return worst

    def within(self, n_sigma: float = 3.0, atol: float = 1e-12) -> bool:
        return all(abs(v) <= n_sigma * self.error(k) + atol for k, v in self.values.items())

    def __getitem__(self, key):
        return self.values.get(key, 0.0), self.error(key)

    def __str__(self):
        if not self.values:
            return "0"
        parts = []
        for k in sorted(self.values, key=repr):
            parts.append(f"({self.values[k]:+.6g}±{self.error(k):.2g}) {self.formatter(k)}")
        return " ".join(parts)


def _evaluate(parts: Iterable, weight_fn: Callable, extract: Callable) -> tuple:
    """``parts``: ``(key, exact_object)``; ``extract`` gives ``{term: Fraction}``."""
    values: dict = {}
    grads: dict = {}
    cache: dict = {}

    def w(key):
        if key not in cache:
            cache[key] = weight_fn(key)
        return cache[key]

    for k, obj in parts:
        terms = extract(obj)
        if not terms:
            continue
        vals = [w(x) for x in k]
        prod = math.prod(float(v.value) for v in vals)
        for t, c in terms.items():
            values[t] = values.get(t, 0.0) + float(c) * prod
        for i, x in enumerate(k):
            if vals[i].error == 0.0:
                continue
            others = math.prod(float(v.value) for j, v in enumerate(vals) if j != i)
            g = grads.setdefault(x, {})
            for t, c in terms.items():
                g[t] = g.get(t, 0.0) + float(c) * others
    variances: dict = {}
    for x, g in grads.items():
        s2 = w(x).error ** 2
        for t, d in g.items():
            variances[t] = variances.get(t, 0.0) + d * d * s2
    return values, variances


def evaluate_op(op: WeightedOp, weight_fn: Callable) -> NumericResult:
    """Numeric operator: terms ``(coef_monomial, slots)`` with errors."""
    def fmt(key):
        return format_op(MultiDiffOp(op.ctx, {key: 1})).replace("(1) * ", "")

    vals, var = _evaluate(op.parts.items(), weight_fn, lambda o: o.terms)
    return NumericResult(vals, var, fmt)


def evaluate_on(op: WeightedOp, args, weight_fn: Callable) -> NumericResult:
    """Apply to concrete arguments, then evaluate the weights."""
    ctx = op.ctx

    def extract(o):
        return o.component(len(args))(*args).terms

    vals, var = _evaluate(op.parts.items(), weight_fn, extract)
    return NumericResult(vals, var, lambda m: ctx.format_monomial(m) or "1")


class WeightedPoly:
    """A polynomial whose coefficients are polynomials in graph weights."""

    __slots__ = ("ctx", "parts")

    def __init__(self, ctx: GradedContext, parts: Mapping | None = None):
        self.ctx = ctx
        self.parts = {k: v for k, v in (parts or {}).items() if not v.is_zero()}

    @classmethod
    def exact(cls, p: GradedPoly) -> "WeightedPoly":
        return cls(p.ctx, {(): p})

    def __add__(self, other: "WeightedPoly") -> "WeightedPoly":
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out[k] + v if k in out else v
        return WeightedPoly(self.ctx, out)

    def __neg__(self):
        return WeightedPoly(self.ctx, {k: -v for k, v in self.parts.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return WeightedPoly(self.ctx, {k: v * c for k, v in self.parts.items()})
        return NotImplemented

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.parts

    def is_exact(self) -> bool:
        return set(self.parts) <= {()}

    def exact_part(self) -> GradedPoly:
        return self.parts.get((), self.ctx.zero())

    def keys(self) -> set:
        return {w for k in self.parts for w in k}

    def degree_parts(self) -> dict:
        """``{degree: WeightedPoly}``."""
        out: dict = {}
        for k, p in self.parts.items():
            for d, part in p.homogeneous_components().items():
                out.setdefault(d, {})[k] = part
        return {d: WeightedPoly(self.ctx, v) for d, v in out.items()}

    def map(self, fn: Callable[[GradedPoly], GradedPoly]) -> "WeightedPoly":
        return WeightedPoly(self.ctx, {k: fn(v) for k, v in self.parts.items()})

    def substitute(self, exact_values: Mapping) -> "WeightedPoly":
        out = WeightedPoly(self.ctx)
        for k, p in self.parts.items():
            c = Fraction(1)
            rest = []
            for w in k:
                if w in exact_values:
                    c *= exact_values[w]
                else:
                    rest.append(w)
            out = out + WeightedPoly(self.ctx, {tuple(rest): p * c})
        return out

    def evaluate(self, weight_fn: Callable) -> NumericResult:
        ctx = self.ctx
        vals, var = _evaluate(self.parts.items(), weight_fn, lambda p: p.terms)
        return NumericResult(vals, var, lambda m: ctx.format_monomial(m) or "1")

    def __str__(self):
        if not self.parts:
            return "0"
        return "\n".join(f"[{' '.join(map(str, k)) or 'exact'}] {v}" for k, v in self.parts.items())


def _as_weighted(a) -> WeightedPoly:
    return a if isinstance(a, WeightedPoly) else WeightedPoly.exact(a)


def wapply(op: WeightedOp, args) -> WeightedPoly:
    """Apply to arguments that may themselves carry weights."""
    wargs = [_as_weighted(a) for a in args]
    out = WeightedPoly(op.ctx)
    comp = op.component(len(args))
    for k0, o in comp.parts.items():
        for choice in itertools.product(*(list(a.parts.items()) for a in wargs)):
            key = k0
            for k, _ in choice:
                key = _merge(key, k)
            val = o(*[p for _, p in choice])
            out = out + WeightedPoly(op.ctx, {key: val})
    return out
