"""Multidifferential operators on a graded-commutative polynomial algebra.

A term ``c * D[D_1|...|D_m]`` stands for the cochain ``L_c o mu_m o (D_1 x ... x D_m)``:
each slot carries a constant-coefficient differential operator (a monomial
in left partial derivatives, ``deg d_i = -deg x_i``), the slot outputs are
multiplied and the result is multiplied on the left by the polynomial ``c``.
Tensor products of maps obey the Koszul rule, so every sign produced by
composition depends on operator degrees only, never on the arguments.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .graded import GradedContext, GradedPoly, mono_mul, mono_partial


class ArityMismatch(ValueError):
    pass


class NotACocycle(ValueError):
    pass


class DecompositionFailed(RuntimeError):
    """The truncated space was too small to exhibit the decomposition."""


@lru_cache(maxsize=None)
def partials_context(ctx: GradedContext) -> GradedContext:
    """Alphabet of the partial derivatives ``d_i`` with degree ``-deg x_i``."""
    return GradedContext(tuple((n, -d) for n, d in ctx.variables))


def _par(x: int) -> int:
    return x % 2


class MultiDiffOp:
    """Finite sum of terms ``coef * (monomial c, (D_1, ..., D_m))``.

    Terms of different arity or degree may be mixed; structural operations
    act term by term with each term's own degree and arity.
    """

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: GradedContext, terms: Mapping | None = None):
        self.ctx = ctx
        self.terms = {}
        for k, v in (terms or {}).items():
            if v:
                self.terms[k] = v if isinstance(v, Fraction) else Fraction(v)

    # -- constructors
    @classmethod
    def zero(cls, ctx: GradedContext) -> "MultiDiffOp":
        return cls(ctx)

    @classmethod
    def product(cls, ctx: GradedContext, arity: int = 2) -> "MultiDiffOp":
        u = ctx.unit()
        return cls(ctx, {(u, (u,) * arity): 1})

    @classmethod
    def identity(cls, ctx: GradedContext) -> "MultiDiffOp":
        return cls.product(ctx, 1)

    @classmethod
    def from_poly(cls, p: GradedPoly) -> "MultiDiffOp":
        """The 0-cochain (constant) ``p``."""
        return cls(p.ctx, {(m, ()): c for m, c in p.terms.items()})

    @classmethod
    def build(cls, coef: GradedPoly, *slots: Sequence[str]) -> "MultiDiffOp":
        """``coef * mu o (D_1 x ... x D_m)``; slot ``k`` lists the variables
        differentiated, leftmost derivative applied last."""
        ctx = coef.ctx
        P = partials_context(ctx)
        out = cls(ctx)
        Ds = []
        sign = 1
        for slot in slots:
            D = P.unit()
            for v in reversed(list(slot)):
                e = [0] * len(P)
                e[P.index(v)] = 1
                r = mono_mul(P, tuple(e), D)
                if r is None:
                    return out
                sign *= r[0]
                D = r[1]
            Ds.append(D)
        Ds = tuple(Ds)
        return cls(ctx, {(m, Ds): sign * c for m, c in coef.terms.items()})

    # -- structure
    @property
    def pctx(self) -> GradedContext:
        return partials_context(self.ctx)

    def term_degree(self, key) -> int:
        c, Ds = key
        P = self.pctx
        return self.ctx.mono_degree(c) + sum(P.mono_degree(D) for D in Ds)

    def arities(self) -> set:
        return {len(Ds) for _, Ds in self.terms}

    @property
    def arity(self) -> int:
        a = self.arities()
        if len(a) != 1:
            raise ArityMismatch(f"operator has arities {sorted(a)}")
        return a.pop()

    def degree(self) -> int:
        ds = {self.term_degree(k) for k in self.terms}
        if len(ds) != 1:
            raise ValueError(f"operator has degrees {sorted(ds)}")
        return ds.pop()

    def component(self, arity: int | None = None, degree: int | None = None) -> "MultiDiffOp":
        return MultiDiffOp(self.ctx, {
            k: v for k, v in self.terms.items()
            if (arity is None or len(k[1]) == arity) and (degree is None or self.term_degree(k) == degree)
        })

    def components(self) -> dict:
        """``{(arity, degree): homogeneous part}``."""
        out: dict = {}
        for k, v in self.terms.items():
            out.setdefault((len(k[1]), self.term_degree(k)), {})[k] = v
        return {key: MultiDiffOp(self.ctx, t) for key, t in out.items()}

    def max_order(self) -> int:
        return max((sum(sum(D) for D in Ds) for _, Ds in self.terms), default=0)

    def max_coeff_length(self) -> int:
        return max((sum(c) for c, _ in self.terms), default=0)

    # -- linear structure
    def _same(self, other: "MultiDiffOp"):
        if self.ctx != other.ctx:
            raise ValueError("operators act on different algebras")

    def __add__(self, other: "MultiDiffOp") -> "MultiDiffOp":
        self._same(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return MultiDiffOp(self.ctx, out)

    def __neg__(self):
        return MultiDiffOp(self.ctx, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return MultiDiffOp(self.ctx, {k: v * c for k, v in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, MultiDiffOp) and self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __call__(self, *args: GradedPoly) -> GradedPoly:
        return apply_op(self, args)

    def __repr__(self):
        return f"MultiDiffOp({self})"

    def __str__(self):
        return format_op(self)


def format_op(op: MultiDiffOp) -> str:
    if op.is_zero():
        return "0"
    P = op.pctx
    pieces = []
    for (c, Ds), v in sorted(op.terms.items(), key=lambda kv: (len(kv[0][1]), kv[0][1], kv[0][0])):
        coef = GradedPoly(op.ctx, {c: v})
        slots = "|".join(",".join(n for n, e in zip(P.names, D) for _ in range(e)) for D in Ds)
        pieces.append(f"({coef}) * D[{slots}]")
    return " + ".join(pieces)


# -- evaluation -------------------------------------------------------------

def apply_monomial_partials(P: GradedContext, D, a: GradedPoly) -> GradedPoly:
    """``d_{v_1}^{e_1}(...(d_{v_n}^{e_n} a))`` for the canonical monomial ``D``."""
    ctx = a.ctx
    terms = dict(a.terms)
    for k in reversed(range(len(D))):
        for _ in range(D[k]):
            new: dict = {}
            for m, c in terms.items():
                r = mono_partial(ctx, m, k, "left")
                if r is not None:
                    new[r[1]] = new.get(r[1], 0) + r[0] * c
            terms = {m: c for m, c in new.items() if c}
            if not terms:
                return GradedPoly(ctx)
    return GradedPoly(ctx, terms)


def apply_op(op: MultiDiffOp, args: Sequence[GradedPoly]) -> GradedPoly:
    """Evaluate with the Koszul sign for each ``D_k`` passing ``a_1..a_{k-1}``."""
    ctx = op.ctx
    P = op.pctx
    m = len(args)
    out = ctx.zero()
    split = [a.parity_components() for a in args]
    for (c, Ds), v in op.terms.items():
        if len(Ds) != m:
            raise ArityMismatch(f"operator of arity {len(Ds)} applied to {m} arguments")
        dpar = [P.mono_parity(D) for D in Ds]
        for choice in itertools.product(*(s.items() for s in split)):
            sign = 0
            acc = 0
            for k, (pk, _) in enumerate(choice):
                sign += dpar[k] * acc
                acc += pk
            val = GradedPoly(ctx, {c: -v if sign % 2 else v})
            for D, (_, a) in zip(Ds, choice):
                val = val * apply_monomial_partials(P, D, a)
                if not val:
                    break
            out = out + val
    return out


# -- composition ------------------------------------------------------------

def _partial_after(A: GradedContext, P: GradedContext, k: int, terms: dict) -> dict:
    """Compose ``d_k`` after ``sum coef * L_c o mu o (Es)`` (Leibniz + Koszul)."""
    pk = A.parities[k]
    e = [0] * len(P)
    e[k] = 1
    e = tuple(e)
    out: dict = {}

    def add(key, val):
        out[key] = out.get(key, 0) + val

    for (c, Es), v in terms.items():
        r = mono_partial(A, c, k, "left")
        if r is not None:
            add((r[1], Es), r[0] * v)
        s0 = -1 if (pk and A.mono_parity(c)) else 1
        acc = 0
        for j, E in enumerate(Es):
            r = mono_mul(P, e, E)
            if r is not None:
                s = s0 * r[0] * (-1 if (pk and acc % 2) else 1)
                add((c, Es[:j] + (r[1],) + Es[j + 1:]), s * v)
            acc += P.mono_parity(E)
    return {k2: v2 for k2, v2 in out.items() if v2}


def _diffop_after(A: GradedContext, P: GradedContext, D, terms: dict) -> dict:
    for k in reversed(range(len(D))):
        for _ in range(D[k]):
            terms = _partial_after(A, P, k, terms)
            if not terms:
                return terms
    return terms


def compose_at(phi: MultiDiffOp, slot: int, psi: MultiDiffOp) -> MultiDiffOp:
    """``phi o (1^slot x psi x 1^rest)`` (terms of ``phi`` with too few slots drop)."""
    phi._same(psi)
    A, P = phi.ctx, phi.pctx
    out: dict = {}
    for (c, Ds), a in phi.terms.items():
        if len(Ds) <= slot:
            continue
        par_before = sum(P.mono_parity(D) for D in Ds[:slot]) % 2
        par_after = sum(P.mono_parity(D) for D in Ds[slot + 1:]) % 2
        for (c2, Es), b in psi.terms.items():
            ppsi = (A.mono_parity(c2) + sum(P.mono_parity(E) for E in Es)) % 2
            s1 = -1 if (ppsi and par_after) else 1
            inner = _diffop_after(A, P, Ds[slot], {(c2, Es): b})
            for (c3, Es3), w in inner.items():
                s2 = -1 if (A.mono_parity(c3) and par_before) else 1
                r = mono_mul(A, c, c3)
                if r is None:
                    continue
                key = (r[1], Ds[:slot] + Es3 + Ds[slot + 1:])
                out[key] = out.get(key, 0) + s1 * s2 * r[0] * a * w
    return MultiDiffOp(A, out)


def _homogeneous_parts(op: MultiDiffOp):
    return op.components().items()


def hochschild_b(phi: MultiDiffOp) -> MultiDiffOp:
    A = phi.ctx
    mu = MultiDiffOp.product(A)
    out = MultiDiffOp.zero(A)
    for (m, _), part in _homogeneous_parts(phi):
        acc = compose_at(mu, 1, part)
        for j in range(1, m + 1):
            acc = acc + compose_at(part, j - 1, mu) * (-1) ** j
        acc = acc + compose_at(mu, 0, part) * (-1) ** (m + 1)
        out = out + acc
    return out


def gerstenhaber_product(phi: MultiDiffOp, psi: MultiDiffOp) -> MultiDiffOp:
    out = MultiDiffOp.zero(phi.ctx)
    for (m1, _), f in _homogeneous_parts(phi):
        for (m2, d2), g in _homogeneous_parts(psi):
            pre = (-1) ** (((d2 + m2 - 1) * (m1 - 1)) % 2)
            for l in range(m1):
                out = out + compose_at(f, l, g) * (pre * (-1) ** ((l * (m2 - 1)) % 2))
    return out


def gerstenhaber_bracket(phi: MultiDiffOp, psi: MultiDiffOp) -> MultiDiffOp:
    out = MultiDiffOp.zero(phi.ctx)
    for (m1, d1), f in _homogeneous_parts(phi):
        for (m2, d2), g in _homogeneous_parts(psi):
            s = (-1) ** (((d1 + m1 - 1) * (d2 + m2 - 1)) % 2)
            out = out + gerstenhaber_product(f, g) - gerstenhaber_product(g, f) * s
    return out


def shifted_degree(op: MultiDiffOp) -> int:
    """Degree in ``C(A,A)[1]``: internal degree plus arity minus one."""
    (m, d), = {(len(k[1]), op.term_degree(k)) for k in op.terms}
    return d + m - 1


def cup(phi1: MultiDiffOp, phi2: MultiDiffOp) -> MultiDiffOp:
    mu = MultiDiffOp.product(phi1.ctx)
    out = MultiDiffOp.zero(phi1.ctx)
    for (m1, _), f in _homogeneous_parts(phi1):
        out = out + compose_at(compose_at(mu, 0, f), m1, phi2)
    return out


# -- truncated HKR decomposition -------------------------------------------

def truncated_decompose(phi: MultiDiffOp, max_poly_degree: int):
    """Split a cocycle as ``hkr(gamma) + b(eta)`` inside a finite truncation.

    The unknowns are all multivectors of matching order and degree, and all
    cochains of one lower arity, whose coefficients have word length at most
    ``max_poly_degree`` (and derivative order bounded by that of ``phi``).
    Returns ``(gamma, eta)``; raises :class:`DecompositionFailed` when the
    truncation does not contain a solution.
    """
    from .hkr import hkr
    from .linalg import solve_rational
    from .multivector import phase_space

    A = phi.ctx
    if phi.is_zero():
        return phase_space(A.variables).zero(), MultiDiffOp.zero(A)
    m = phi.arity
    p = phi.degree()
    if m > 3:
        raise ValueError("truncated_decompose supports arity <= 3")
    if not hochschild_b(phi).is_zero():
        raise NotACocycle("input is not a Hochschild cocycle")
    ps = phase_space(A.variables)
    P = partials_context(A)
    coeffs = A.monomials(max_poly_degree)
    order = max(phi.max_order(), m)

    columns = []
    gammas = []
    # multivectors of order m whose hkr image has degree p
    for cm in coeffs:
        for th in ps.monomials(m, ps.conj_names):
            if sum(th) != m:
                continue
            mono = tuple(a + b for a, b in zip(cm + (0,) * ps.n_base, th))
            g = GradedPoly(ps, {mono: 1})
            if g.degree() - m != p:
                continue
            img = hkr(g)
            if img:
                gammas.append(g)
                columns.append(img)
    n_gamma = len(columns)
    etas = []
    if m >= 1:
        slot_monos = P.monomials(order)
        for cm in coeffs:
            for Ds in itertools.product(slot_monos, repeat=m - 1):
                if sum(sum(D) for D in Ds) > order:
                    continue
                eta = MultiDiffOp(A, {(cm, Ds): 1})
                if eta.degree() != p:
                    continue
                img = hochschild_b(eta)
                if img:
                    etas.append(eta)
                    columns.append(img)
    keys = sorted({k for col in columns + [phi] for k in col.terms}, key=repr)
    index = {k: i for i, k in enumerate(keys)}
    if any(k not in index for k in phi.terms):
        raise DecompositionFailed("truncation does not span the input")
    mat = [[Fraction(0)] * len(columns) for _ in keys]
    for j, col in enumerate(columns):
        for k, v in col.terms.items():
            mat[index[k]][j] = v
    rhs = [phi.terms.get(k, Fraction(0)) for k in keys]
    sol = solve_rational(mat, rhs)
    if sol is None:
        raise DecompositionFailed("no solution inside the truncation; enlarge max_poly_degree")
    gamma = ps.zero()
    for c, g in zip(sol[:n_gamma], gammas):
        if c:
            gamma = gamma + g * c
    eta = MultiDiffOp.zero(A)
    for c, e in zip(sol[n_gamma:], etas):
        if c:
            eta = eta + e * c
    return gamma, eta
