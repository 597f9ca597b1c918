"""Graded-commutative polynomial rings with exact rational coefficients.

A :class:`GradedContext` declares an ordered alphabet of variables with
integer degrees.  Monomials are plain tuples of exponents (one entry per
declared variable); odd variables appear with exponent 0 or 1 and the
canonical order of odd factors is the declaration order, any reordering
sign being absorbed into the coefficient.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

Monomial = tuple  # tuple[int, ...], one exponent per context variable
Scalar = Union[int, Fraction]


class ContextMismatch(ValueError):
    pass


class UnknownVariable(KeyError):
    pass


@dataclass(frozen=True)
class GradedContext:
    """Ordered variable alphabet ``((name, degree), ...)``."""

    variables: tuple

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple((str(n), int(d)) for n, d in self.variables))
        names = [n for n, _ in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    @classmethod
    def of(cls, *specs: tuple) -> "GradedContext":
        return cls(tuple(specs))

    @cached_property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.variables)

    @cached_property
    def degrees(self) -> tuple:
        return tuple(d for _, d in self.variables)

    @cached_property
    def parities(self) -> tuple:
        return tuple(d % 2 for d in self.degrees)

    @cached_property
    def _index(self) -> dict:
        return {n: i for i, n in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.variables)

    def index(self, name) -> int:
        if isinstance(name, int):
            if not 0 <= name < len(self):
                raise UnknownVariable(name)
            return name
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def degree_of(self, name) -> int:
        return self.degrees[self.index(name)]

    def unit(self) -> Monomial:
        return (0,) * len(self)

    def mono_degree(self, m: Monomial) -> int:
        return sum(e * d for e, d in zip(m, self.degrees))

    def mono_parity(self, m: Monomial) -> int:
        return sum(e for e, p in zip(m, self.parities) if p) % 2

    def var(self, name, coeff: Scalar = 1) -> "GradedPoly":
        k = self.index(name)
        m = [0] * len(self)
        m[k] = 1
        return GradedPoly(self, {tuple(m): Fraction(coeff)})

    def const(self, c: Scalar) -> "GradedPoly":
        return GradedPoly(self, {self.unit(): Fraction(c)})

    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def gens(self) -> tuple:
        return tuple(self.var(n) for n in self.names)

    def monomials(self, max_degree: int, variables: Sequence | None = None) -> list:
        """All monomials of total exponent (word length) <= ``max_degree``
        in the given variables, respecting odd exponents <= 1."""
        idx = [self.index(v) for v in (variables if variables is not None else self.names)]
        out = []
        for total in range(max_degree + 1):
            for combo in itertools.combinations_with_replacement(idx, total):
                m = [0] * len(self)
                for k in combo:
                    m[k] += 1
                if any(m[k] > 1 and self.parities[k] for k in idx):
                    continue
                out.append(tuple(m))
        return out

    def format_monomial(self, m: Monomial) -> str:
        parts = []
        for n, e in zip(self.names, m):
            if e == 1:
                parts.append(n)
            elif e > 1:
                parts.append(f"{n}^{e}")
        return "*".join(parts)


def mono_mul(ctx: GradedContext, a: Monomial, b: Monomial):
    """Product of canonical monomials: ``(sign, monomial)`` or ``None`` if zero."""
    par = ctx.parities
    swaps = 0
    for j, (eb, pj) in enumerate(zip(b, par)):
        if pj and eb:
            if a[j]:
                return None
            # odd factors of ``a`` sitting after position j must be crossed
            for i in range(j + 1, len(a)):
                if par[i] and a[i]:
                    swaps += 1
    return (-1 if swaps % 2 else 1), tuple(x + y for x, y in zip(a, b))


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class GradedPoly:
    """Element of the free graded-commutative algebra over ``ctx``."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: GradedContext, terms: Mapping | None = None):
        self.ctx = ctx
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[tuple(m)] = c if isinstance(c, Fraction) else Fraction(c)
        self.terms = clean

    # -- construction helpers
    def _same(self, other: "GradedPoly") -> None:
        if self.ctx != other.ctx:
            raise ContextMismatch("polynomials live in different graded contexts")

    def _coerce(self, other) -> "GradedPoly":
        if isinstance(other, GradedPoly):
            self._same(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.const(other)
        return NotImplemented

    # -- arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return GradedPoly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GradedPoly(self.ctx, {m: c * other for m, c in self.terms.items()})
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return poly_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, n: int):
        out = self.ctx.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.const(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __iter__(self) -> Iterator:
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    # -- grading
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set:
        return {self.ctx.mono_degree(m) for m in self.terms}

    def degree(self) -> int:
        """Degree of a homogeneous element; ``ValueError`` otherwise."""
        ds = self.degrees()
        if len(ds) != 1:
            if not ds:
                raise ValueError("the zero polynomial has no degree")
            raise ValueError(f"inhomogeneous element with degrees {sorted(ds)}")
        return ds.pop()

    def homogeneous_components(self) -> dict:
        out: dict = {}
        for m, c in self.terms.items():
            out.setdefault(self.ctx.mono_degree(m), {})[m] = c
        return {d: GradedPoly(self.ctx, t) for d, t in out.items()}

    def parity_components(self) -> dict:
        out: dict = {}
        for m, c in self.terms.items():
            out.setdefault(self.ctx.mono_parity(m), {})[m] = c
        return {p: GradedPoly(self.ctx, t) for p, t in out.items()}

    def filter(self, pred) -> "GradedPoly":
        return GradedPoly(self.ctx, {m: c for m, c in self.terms.items() if pred(m)})

    def subs_zero(self, names: Iterable) -> "GradedPoly":
        """Set the given variables to zero."""
        idx = [self.ctx.index(n) for n in names]
        return self.filter(lambda m: all(m[k] == 0 for k in idx))

    def constant_term(self) -> Fraction:
        return self.terms.get(self.ctx.unit(), Fraction(0))

    def max_word_length(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def __repr__(self):
        return f"GradedPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        idx = {m: i for i, m in enumerate(sorted(self.terms, key=lambda m: (sum(m), tuple(-e for e in m))))}
        pieces = []
        for m in sorted(self.terms, key=idx.get):
            c = self.terms[m]
            mono = self.ctx.format_monomial(m)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_coeff(a)}*{mono}"
            pieces.append((sign, body))
        s = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            s += f" {sign} {body}"
        return s


def poly_mul(p: GradedPoly, q: GradedPoly) -> GradedPoly:
    p._same(q)
    ctx = p.ctx
    out: dict = {}
    for a, ca in p.terms.items():
        for b, cb in q.terms.items():
            r = mono_mul(ctx, a, b)
            if r is None:
                continue
            s, m = r
            out[m] = out.get(m, 0) + s * ca * cb
    return GradedPoly(ctx, out)


def _odd_count(ctx: GradedContext, m: Monomial, lo: int, hi: int) -> int:
    par = ctx.parities
    return sum(1 for i in range(lo, hi) if par[i] and m[i])


def mono_partial(ctx: GradedContext, m: Monomial, k: int, side: str = "left"):
    """``(coefficient, monomial)`` of the partial derivative, or ``None``."""
    e = m[k]
    if e == 0:
        return None
    new = m[:k] + (e - 1,) + m[k + 1 :]
    if not ctx.parities[k]:
        return e, new
    if side == "left":
        n = _odd_count(ctx, m, 0, k)
    else:
        n = _odd_count(ctx, m, k + 1, len(m))
    return (-1 if n % 2 else 1), new


def left_partial(p: GradedPoly, v) -> GradedPoly:
    """Left derivative: acts from the left, degree ``-deg(v)``."""
    k = p.ctx.index(v)
    out: dict = {}
    for m, c in p.terms.items():
        r = mono_partial(p.ctx, m, k, "left")
        if r is not None:
            out[r[1]] = out.get(r[1], 0) + r[0] * c
    return GradedPoly(p.ctx, out)


def right_partial(p: GradedPoly, v) -> GradedPoly:
    """Right derivative ``p <- d_v``, a right derivation."""
    k = p.ctx.index(v)
    out: dict = {}
    for m, c in p.terms.items():
        r = mono_partial(p.ctx, m, k, "right")
        if r is not None:
            out[r[1]] = out.get(r[1], 0) + r[0] * c
    return GradedPoly(p.ctx, out)


def permutation_sign(sigma: Sequence[int], degrees: Sequence[int]) -> int:
    """Koszul sign ``(-1)^{sum_{i<j, s(i)>s(j)} d_i d_j}``; ``sigma`` lists the
    images ``(s(1), ..., s(n))`` of a permutation of ``{1..n}``."""
    n = len(sigma)
    if n != len(degrees):
        raise ValueError("permutation and degree sequence differ in length")
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError(f"{tuple(sigma)} is not a permutation of 1..{n}")
    e = 0
    for i in range(n):
        for j in range(i + 1, n):
            if sigma[i] > sigma[j]:
                e += degrees[i] * degrees[j]
    return -1 if e % 2 else 1


def sign_of(sigma: Sequence[int]) -> int:
    return permutation_sign(sigma, [1] * len(sigma))


def permute_degrees(sigma: Sequence[int], degrees: Sequence[int]) -> tuple:
    """Degrees after moving the entry at position ``a`` to position ``sigma(a)``."""
    out = [0] * len(sigma)
    for a, s in enumerate(sigma):
        out[s - 1] = degrees[a]
    return tuple(out)


# -- tensors --------------------------------------------------------------

class Tensor:
    """Element of ``A^{(x)n}``: a finite sum of pure tensors of monomials."""

    __slots__ = ("ctx", "arity", "terms")

    def __init__(self, ctx: GradedContext, arity: int, terms: Mapping | None = None):
        self.ctx = ctx
        self.arity = arity
        self.terms = {k: Fraction(c) for k, c in (terms or {}).items() if c}

    @classmethod
    def pure(cls, *factors: GradedPoly) -> "Tensor":
        if not factors:
            raise ValueError("need at least one factor")
        ctx = factors[0].ctx
        out: dict = {}
        for combo in itertools.product(*(f.terms.items() for f in factors)):
            key = tuple(m for m, _ in combo)
            c = math.prod((c for _, c in combo), start=Fraction(1))
            out[key] = out.get(key, 0) + c
        return cls(ctx, len(factors), out)

    def __add__(self, other: "Tensor") -> "Tensor":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return Tensor(self.ctx, self.arity, out)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + other.scale(-1)

    def scale(self, c) -> "Tensor":
        return Tensor(self.ctx, self.arity, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, Tensor) and self.arity == other.arity and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def permuted(self, sigma: Sequence[int]) -> "Tensor":
        """Koszul action: factor ``a`` moves to slot ``sigma(a)``."""
        out: dict = {}
        for key, c in self.terms.items():
            degs = [self.ctx.mono_parity(m) for m in key]
            s = permutation_sign(sigma, degs)
            new = [None] * self.arity
            for a, t in enumerate(sigma):
                new[t - 1] = key[a]
            new = tuple(new)
            out[new] = out.get(new, 0) + s * c
        return Tensor(self.ctx, self.arity, out)

    def slots(self) -> Iterator:
        """Yield ``(coefficient, [GradedPoly, ...])`` pure summands."""
        for key, c in self.terms.items():
            yield c, [GradedPoly(self.ctx, {m: 1}) for m in key]


def alt_project(t: Tensor) -> Tensor:
    """Graded alternation ``(1/n!) sum sign(s) s`` with the Koszul action."""
    n = t.arity
    out = Tensor(t.ctx, n)
    for perm in itertools.permutations(range(1, n + 1)):
        out = out + t.permuted(perm).scale(sign_of(perm))
    return out.scale(Fraction(1, math.factorial(n)))
