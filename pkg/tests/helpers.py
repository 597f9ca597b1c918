"""Shared generators for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from relform.graded import GradedContext, GradedPoly
from relform.hochschild import MultiDiffOp, partials_context

MIXED = GradedContext.of(("x1", 0), ("x2", 0), ("t1", 1), ("t2", 1), ("u", -1))
EVEN2 = GradedContext.of(("x1", 0), ("x2", 0))


def random_poly(rng: random.Random, ctx: GradedContext, max_len: int = 2, n_terms: int = 3) -> GradedPoly:
    monos = ctx.monomials(max_len)
    return GradedPoly(ctx, {rng.choice(monos): Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n_terms)})


def random_homogeneous(rng: random.Random, ctx: GradedContext, max_len: int = 2) -> GradedPoly:
    monos = ctx.monomials(max_len)
    m = rng.choice(monos)
    d = ctx.mono_degree(m)
    same = [k for k in monos if ctx.mono_degree(k) == d]
    return GradedPoly(ctx, {rng.choice(same): rng.randint(1, 3) for _ in range(2)})


def random_op(rng: random.Random, ctx: GradedContext, arity: int, n_terms: int = 2, order: int = 2) -> MultiDiffOp:
    P = partials_context(ctx)
    slots = P.monomials(order)
    coefs = ctx.monomials(1)
    terms = {}
    for _ in range(n_terms):
        key = (rng.choice(coefs), tuple(rng.choice(slots) for _ in range(arity)))
        terms[key] = Fraction(rng.randint(-2, 2))
    return MultiDiffOp(ctx, terms)


# -- hypothesis strategies --------------------------------------------------

from hypothesis import strategies as st  # noqa: E402

COEFS = st.builds(Fraction, st.integers(-3, 3), st.integers(1, 3))


def polys(ctx: GradedContext, max_len: int = 2, max_terms: int = 3):
    monos = ctx.monomials(max_len)
    return st.dictionaries(st.sampled_from(monos), COEFS, max_size=max_terms).map(lambda d: GradedPoly(ctx, d))


def homogeneous(ctx: GradedContext, max_len: int = 2, max_terms: int = 2):
    """Nonzero homogeneous polynomials."""
    monos = ctx.monomials(max_len)
    by_deg: dict = {}
    for m in monos:
        by_deg.setdefault(ctx.mono_degree(m), []).append(m)
    groups = list(by_deg.values())

    def build(group):
        nonzero = COEFS.filter(bool)
        return st.dictionaries(st.sampled_from(group), nonzero, min_size=1, max_size=max_terms).map(
            lambda d: GradedPoly(ctx, d))

    return st.sampled_from(groups).flatmap(build)


def ops(ctx: GradedContext, arity: int, n_terms: int = 2, order: int = 2):
    return st.randoms(use_true_random=False).map(lambda r: random_op(r, ctx, arity, n_terms, order))
