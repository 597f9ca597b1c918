"""Multivector fields as functions on the shifted cotangent bundle.

For an algebra ``A = k[x_1..x_d]`` with ``deg x_i = e_i`` the multivector
fields are ``k[x, theta][1]`` where ``theta_i`` is conjugate to ``x_i`` with
``deg theta_i = 1 - e_i``.  The Schouten bracket is the odd Poisson bracket
of degree -1 on the unshifted algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .graded import GradedContext, GradedPoly, left_partial, right_partial

CONJ_PREFIX = "d_"


@dataclass(frozen=True)
class PhaseSpace(GradedContext):
    """Doubled context: ``n_base`` base variables followed by their conjugates."""

    n_base: int = 0

    def __post_init__(self):
        super().__post_init__()
        if len(self.variables) != 2 * self.n_base:
            raise ValueError("a phase space needs exactly one conjugate per base variable")
        for i in range(self.n_base):
            if self.degrees[i] + self.degrees[self.n_base + i] != 1:
                raise ValueError(f"conjugate of {self.names[i]} must have degree 1 - {self.degrees[i]}")

    @cached_property
    def base(self) -> GradedContext:
        return GradedContext(self.variables[: self.n_base])

    @cached_property
    def base_names(self) -> tuple:
        return self.names[: self.n_base]

    @cached_property
    def conj_names(self) -> tuple:
        return self.names[self.n_base :]

    def conj(self, name) -> str:
        return self.names[self.index(name) + self.n_base]

    def conj_degree(self, m) -> int:
        """Number of conjugate factors (the multivector order) of a monomial."""
        return sum(m[self.n_base :])

    def embed(self, p: GradedPoly) -> GradedPoly:
        """Push a polynomial of the base algebra into the phase space."""
        if p.ctx != self.base:
            if p.ctx == self:
                return p
            raise ValueError("polynomial does not belong to the base algebra")
        pad = (0,) * self.n_base
        return GradedPoly(self, {m + pad: c for m, c in p.terms.items()})

    def restrict(self, g: GradedPoly) -> GradedPoly:
        """Project to the base algebra by setting every conjugate to zero."""
        out = {m[: self.n_base]: c for m, c in g.terms.items() if not any(m[self.n_base :])}
        return GradedPoly(self.base, out)

    def order_components(self, g: GradedPoly) -> dict:
        out: dict = {}
        for m, c in g.terms.items():
            out.setdefault(self.conj_degree(m), {})[m] = c
        return {k: GradedPoly(self, t) for k, t in out.items()}


def phase_space(base: Sequence, conj_names: Sequence[str] | None = None) -> PhaseSpace:
    """Build the doubled context of ``base = [(name, degree), ...]``."""
    base = [(str(n), int(d)) for n, d in base]
    if conj_names is None:
        conj_names = [CONJ_PREFIX + n for n, _ in base]
    conj = [(c, 1 - d) for c, (_, d) in zip(conj_names, base)]
    return PhaseSpace(tuple(base + conj), n_base=len(base))


def _check(g1: GradedPoly, g2: GradedPoly) -> PhaseSpace:
    ps = g1.ctx
    if not isinstance(ps, PhaseSpace):
        raise TypeError("multivectors must live in a PhaseSpace context")
    g1._same(g2)
    return ps


def schouten(g1: GradedPoly, g2: GradedPoly) -> GradedPoly:
    """``sum_i (g1 <-d_theta_i)(d_x_i-> g2) - (g1 <-d_x_i)(d_theta_i-> g2)``."""
    ps = _check(g1, g2)
    out = ps.zero()
    for i in range(ps.n_base):
        x, th = ps.names[i], ps.names[ps.n_base + i]
        a = right_partial(g1, th)
        if a:
            out = out + a * left_partial(g2, x)
        b = right_partial(g1, x)
        if b:
            out = out - b * left_partial(g2, th)
    return out


def schouten_left(g1: GradedPoly, g2: GradedPoly) -> GradedPoly:
    """The same bracket written with left derivatives only."""
    ps = _check(g1, g2)
    out = ps.zero()
    for deg, comp in g1.homogeneous_components().items():
        for i in range(ps.n_base):
            x, th = ps.names[i], ps.names[ps.n_base + i]
            e = ps.degrees[i]
            s1 = -1 if ((1 - e) * (deg - 1)) % 2 else 1
            s2 = -1 if (e * (deg - 1)) % 2 else 1
            out = out + (left_partial(comp, th) * left_partial(g2, x)) * s1
            out = out - (left_partial(comp, x) * left_partial(g2, th)) * s2
    return out


def mv_degree(g: GradedPoly) -> int:
    """Degree in the shifted Lie algebra: polynomial degree minus one."""
    return g.degree() - 1


def check_poisson(pi: GradedPoly) -> bool:
    if mv_degree(pi) != 1:
        raise ValueError("a Poisson element must have multivector degree 1")
    return schouten(pi, pi).is_zero()


def bivector_coefficients(pi: GradedPoly) -> dict:
    """``{(i, j): pi^{ij}}`` over base indices, both orders filled in with the
    graded symmetry ``pi^{ji} = (-1)^{(1-e_i)(1-e_j)} pi^{ij}``."""
    ps = pi.ctx
    n = ps.n_base
    out: dict = {}
    for m, c in pi.terms.items():
        if ps.conj_degree(m) != 2:
            raise ValueError("not a bivector")
        idx = [k for k in range(n) for _ in range(m[n + k])]
        i, j = idx
        coeff = GradedPoly(ps.base, {m[:n]: c})
        out[(i, j)] = out.get((i, j), ps.base.zero()) + coeff
    for (i, j), c in list(out.items()):
        if i != j:
            e = ((1 - ps.degrees[i]) * (1 - ps.degrees[j])) % 2
            out[(j, i)] = -c if e else c
    return out
