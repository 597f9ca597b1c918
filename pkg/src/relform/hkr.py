"""The HKR map from multivector fields to alternating multidifferential operators."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .graded import GradedContext, GradedPoly
from .hochschild import MultiDiffOp, apply_op, partials_context
from .multivector import PhaseSpace


def _reorder_sign(seq, parities) -> int:
    """Koszul sign of sorting ``seq`` into increasing order."""
    s = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b] and parities[seq[a]] and parities[seq[b]]:
                s += 1
    return -1 if s % 2 else 1


def hkr(gamma: GradedPoly) -> MultiDiffOp:
    """Alternating sum ``gamma^{i_1..i_m} mu o (d_{i_1} x ... x d_{i_m})``.

    ``gamma^I`` are the graded-symmetric coefficients, so a canonical term
    ``c * theta_J`` has ``gamma^J = c * prod(mult!) / m!`` and each reordering
    of ``J`` contributes with its Koszul sign in the theta degrees.
    """
    ps = gamma.ctx
    if not isinstance(ps, PhaseSpace):
        raise TypeError("hkr expects a multivector in a PhaseSpace context")
    A = ps.base
    P = partials_context(A)
    n = ps.n_base
    theta_par = [ps.parities[n + i] for i in range(n)]
    eps = A.degrees
    out: dict = {}
    for mono, c in gamma.terms.items():
        base, th = mono[:n], mono[n:]
        J = [i for i in range(n) for _ in range(th[i])]
        m = len(J)
        gJ = c * Fraction(math.prod(math.factorial(e) for e in th), math.factorial(m))
        for order in set(itertools.permutations(J)):
            sign = _reorder_sign(order, theta_par)
            sign *= -1 if sum(a * eps[i] for a, i in enumerate(order)) % 2 else 1
            Ds = []
            for i in order:
                e = [0] * n
                e[i] = 1
                Ds.append(tuple(e))
            key = (base, tuple(Ds))
            out[key] = out.get(key, 0) + sign * gJ
    return MultiDiffOp(A, out)


def probe_arguments(ctx: GradedContext, max_degree: int = 2) -> list:
    return [GradedPoly(ctx, {m: 1}) for m in ctx.monomials(max_degree)]


def is_hkr_cocycle(phi: MultiDiffOp, max_degree: int | None = None) -> bool:
    """Multiderivation in the last slot and graded-alternating, on test monomials.

    Arguments range over monomials of word length ``<= max_degree`` (default
    ``max(2, order of phi)``); the Leibniz rule is tested against every
    generator times every test monomial.
    """
    A = phi.ctx
    if max_degree is None:
        max_degree = max(2, phi.max_order())
    T = probe_arguments(A, max_degree)
    gens = A.gens()
    for (m, d), part in phi.components().items():
        if m == 0:
            continue
        for head in itertools.product(T, repeat=m - 1):
            shift = d + sum(a.degree() for a in head)
            for f in gens:
                for g in T:
                    lhs = apply_op(part, list(head) + [f * g])
                    rhs = apply_op(part, list(head) + [f]) * g
                    tail = f * apply_op(part, list(head) + [g])
                    rhs = rhs + (tail if (shift * f.degree()) % 2 == 0 else -tail)
                    if lhs != rhs:
                        return False
        for args in itertools.product(T, repeat=m):
            base = apply_op(part, list(args))
            for i in range(m - 1):
                swapped = list(args)
                swapped[i], swapped[i + 1] = args[i + 1], args[i]
                s = -1 if (args[i].degree() * args[i + 1].degree()) % 2 == 0 else 1
                if apply_op(part, swapped) * s != base:
                    return False
    return True
