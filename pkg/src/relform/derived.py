"""Higher derived brackets and the P-infinity structure of a coordinate submanifold.

``C = {y = 0}`` inside ``M`` with coordinates ``(x, y)``.  The abelian
subalgebra ``a`` of multivector fields on ``M`` is spanned by polynomials in
``x`` and ``eta = d_y``; the projection ``P`` kills every monomial containing
a ``y`` or a ``d_x``.  Arguments of ``lambda_n`` live on the A side
``k[x, theta]`` and are carried to ``a`` by the Fourier map.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .fourier import FourierDictionary, fourier_poisson_to_lambda, y_degree
from .graded import GradedPoly
from .hkr import hkr
from .hochschild import MultiDiffOp
from .multivector import PhaseSpace, schouten


class OutsideSubalgebra(ValueError):
    pass


@dataclass(frozen=True)
class SubmanifoldSpec:
    """Base coordinates ``((name, degree), ...)``, transverse names and order ``K``."""

    base: tuple
    transverse: tuple
    K: int = 2

    def __post_init__(self):
        object.__setattr__(self, "base", tuple((str(n), int(d)) for n, d in self.base))
        object.__setattr__(self, "transverse", tuple(str(y) for y in self.transverse))
        if self.K < 0:
            raise ValueError("truncation order must be non-negative")
        if {n for n, _ in self.base} & set(self.transverse):
            raise ValueError("base and transverse variables overlap")

    @cached_property
    def dictionary(self) -> FourierDictionary:
        return FourierDictionary(self.base, self.transverse)

    @property
    def a_side(self) -> PhaseSpace:
        return self.dictionary.a_side

    @property
    def b_side(self) -> PhaseSpace:
        return self.dictionary.b_side


def taylor_truncate(pi: GradedPoly, spec: SubmanifoldSpec) -> GradedPoly:
    d = spec.dictionary
    return pi.filter(lambda m: y_degree(d, m) <= spec.K)


def _killed(spec: SubmanifoldSpec) -> list:
    B = spec.b_side
    idx = [B.index(y) for y in spec.transverse]
    idx += [B.index(B.conj(n)) for n, _ in spec.base]
    return idx


def project(g: GradedPoly, spec: SubmanifoldSpec) -> GradedPoly:
    """``P``: drop monomials containing a transverse ``y`` or a base conjugate."""
    idx = _killed(spec)
    return g.filter(lambda m: not any(m[k] for k in idx))


def in_subalgebra(g: GradedPoly, spec: SubmanifoldSpec) -> bool:
    return g.ctx == spec.b_side and project(g, spec) == g


def derived_bracket(pi: GradedPoly, args: Sequence[GradedPoly], spec: SubmanifoldSpec) -> GradedPoly:
    """``P[...[[pi, a_1], a_2], ..., a_n]`` with every ``a_i`` in ``a``."""
    acc = pi
    for a in args:
        if not in_subalgebra(a, spec):
            raise OutsideSubalgebra(f"{a} is not in the abelian subalgebra")
        acc = schouten(acc, a)
    return project(acc, spec)


def _lie_degree(a: GradedPoly) -> int:
    return a.degree() - 1


def lambda_n(pi: GradedPoly, spec: SubmanifoldSpec, n: int, args: Sequence[GradedPoly]) -> GradedPoly:
    """``(-1)^{sum_i (n-i) deg a_i}`` times the derived bracket, on ``k[x, theta]``.

    ``deg`` is the degree in the Lie algebra, one less than the polynomial
    degree.  This exponent (rather than ``(i-1) deg a_i``) is the one for which
    the brackets coincide with the Fourier image of the Poisson element and
    satisfy the L-infinity identities; with ``(i-1)`` both fail on mixed
    function/normal-vector arguments.  Inhomogeneous arguments are split
    into homogeneous parts.
    """
    if len(args) != n:
        raise ValueError(f"lambda_{n} takes {n} arguments")
    d = spec.dictionary
    A = spec.a_side
    args = [A.embed(a) for a in args]
    for a in args:
        if any(A.conj_degree(m) for m in a.terms):
            raise OutsideSubalgebra(f"{a} is not a function on the A side")
    out = A.zero()
    split = [list(a.homogeneous_components().items()) for a in args]
    for choice in itertools.product(*split):
        degs = [_lie_degree(c) for _, c in choice]
        sign = -1 if sum((n - 1 - i) * g for i, g in enumerate(degs)) % 2 else 1
        val = derived_bracket(pi, [d.fourier(c) for _, c in choice], spec)
        out = out + d.inverse(val) * sign
    return A.restrict(out)


def is_coisotropic(pi: GradedPoly, spec: SubmanifoldSpec) -> bool:
    """``{y_mu, y_nu}`` vanishes on ``C`` for all transverse pairs, i.e. ``lambda_0 = 0``."""
    return project(pi, spec).is_zero()


@dataclass
class PInfinityStructure:
    """``lambdas[n]`` is the A-side multivector of order ``n`` (``lambda_0`` a function).

    As an operator ``lambda_n = n! * hkr(lambdas[n])``.
    """

    spec: SubmanifoldSpec
    lambdas: dict = field(default_factory=dict)

    @property
    def max_arity(self) -> int:
        return max(self.lambdas, default=-1)

    def multivector(self) -> GradedPoly:
        out = self.spec.a_side.zero()
        for g in self.lambdas.values():
            out = out + g
        return out

    def operator(self, n: int) -> MultiDiffOp:
        g = self.lambdas.get(n, self.spec.a_side.zero())
        op = hkr(g) * math.factorial(n)
        if not op.terms:
            return MultiDiffOp.zero(self.spec.a_side.base)
        return op

    def __call__(self, n: int, *args: GradedPoly) -> GradedPoly:
        A = self.spec.a_side
        if n == 0:
            return A.restrict(self.lambdas.get(0, A.zero()))
        return self.operator(n)(*[A.restrict(A.embed(a)) for a in args])

    def __eq__(self, other):
        if not isinstance(other, PInfinityStructure):
            return NotImplemented
        keys = set(self.lambdas) | set(other.lambdas)
        z = self.spec.a_side.zero()
        return all(self.lambdas.get(k, z) == other.lambdas.get(k, z) for k in keys)


def structure_from_fourier(pi: GradedPoly, spec: SubmanifoldSpec, n_max: int | None = None) -> PInfinityStructure:
    """Split ``F^{-1}`` of the truncated Poisson element by multivector order."""
    A = spec.a_side
    lam = fourier_poisson_to_lambda(spec.dictionary, pi, spec.K)
    parts = A.order_components(lam)
    if n_max is not None:
        parts = {k: v for k, v in parts.items() if k <= n_max}
    return PInfinityStructure(spec, parts)


def _generator_sign(A: PhaseSpace, order: Sequence[int]) -> int:
    eps = A.degrees
    s = sum(a * eps[i] for a, i in enumerate(order))
    seen = 0
    for i in order:
        s += eps[i] * seen
        seen += eps[i]
    return -1 if s % 2 else 1


def structure_from_brackets(pi: GradedPoly, spec: SubmanifoldSpec, n_max: int) -> PInfinityStructure:
    """Reconstruct each ``lambda_n`` as a multivector from its values on generators.

    A graded-alternating multiderivation is fixed by its values on tuples of
    generators, so this is an independent route to the same structure.
    """
    A = spec.a_side
    base = A.base
    n = A.n_base
    pad = (0,) * n
    out = {}
    lam0 = spec.dictionary.inverse(project(pi, spec))
    if lam0:
        out[0] = lam0
    gens = base.gens()
    for k in range(1, n_max + 1):
        acc = A.zero()
        for J in itertools.combinations_with_replacement(range(n), k):
            th = [0] * n
            for i in J:
                th[i] += 1
            if any(th[i] > 1 and A.parities[n + i] for i in range(n)):
                continue
            val = lambda_n(pi, spec, k, [gens[i] for i in J])
            if not val:
                continue
            val = A.embed(val)
            scale = Fraction(_generator_sign(A, J), math.prod(math.factorial(e) for e in th))
            mono_t = GradedPoly(A, {pad + tuple(th): scale})
            acc = acc + val * mono_t
        if acc:
            out[k] = acc
    return PInfinityStructure(spec, out)


def _koszul_reorder_sign(perm: Sequence[int], degrees: Sequence[int]) -> int:
    s = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                s += degrees[perm[a]] * degrees[perm[b]]
    return -1 if s % 2 else 1


def _perm_sign(perm: Sequence[int]) -> int:
    s = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            s += perm[a] > perm[b]
    return -1 if s % 2 else 1


def linfty_jacobi_residual(lam: PInfinityStructure, args: Sequence[GradedPoly]) -> GradedPoly:
    """``sum_q (-1)^{q(n-q)}/(q!(n-q)!) lambda_{n-q+1}(lambda_q(..), ..)`` after ``Alt_n``."""
    n = len(args)
    base = lam.spec.a_side.base
    degs = [a.degree() for a in args]
    out = base.zero()
    for perm in itertools.permutations(range(n)):
        s = _perm_sign(perm) * _koszul_reorder_sign(perm, degs)
        b = [args[i] for i in perm]
        for q in range(n + 1):
            inner = lam(q, *b[:q])
            if not inner:
                continue
            val = lam(n - q + 1, inner, *b[q:])
            c = Fraction((-1) ** (q * (n - q)), math.factorial(q) * math.factorial(n - q) * math.factorial(n))
            out = out + val * (c * s)
    return out
