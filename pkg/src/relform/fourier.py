"""Fourier transform between the two multivector algebras of a trivial bundle.

The A side is ``k[x, theta]`` (``theta_mu`` odd, one per fiber coordinate),
with conjugates ``xi = d_x`` and ``psi_mu`` (degree 0).  The B side is
``k[x, y]`` with conjugates ``xi`` and ``eta_mu = d_y`` (degree 1).  The
generator map is ``xi -> xi, theta -> -eta, psi -> y`` on a fixed sign
convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .graded import GradedContext, GradedPoly, UnknownVariable
from .multivector import CONJ_PREFIX, PhaseSpace, phase_space

THETA_PREFIX = "theta_"
PSI_PREFIX = "psi_"


def substitute(p: GradedPoly, target: GradedContext, images: Mapping[str, GradedPoly]) -> GradedPoly:
    """Algebra map sending each generator of ``p.ctx`` to ``images[name]``.

    Factors are multiplied in declaration order, so odd generators keep the
    canonical order of the source monomial.
    """
    src = p.ctx
    missing = [n for n in src.names if n not in images]
    if missing:
        raise UnknownVariable(missing[0])
    out = target.zero()
    for m, c in p.terms.items():
        val = target.const(c)
        for name, e in zip(src.names, m):
            for _ in range(e):
                val = val * images[name]
        out = out + val
    return out


@dataclass(frozen=True)
class FourierDictionary:
    """Base variables ``((name, degree), ...)`` and even fiber coordinates."""

    base: tuple
    fiber: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple((str(n), int(d)) for n, d in self.base))
        object.__setattr__(self, "fiber", tuple(str(y) for y in self.fiber))
        clash = {n for n, _ in self.base} & set(self.fiber)
        if clash:
            raise ValueError(f"variables {sorted(clash)} are both base and fiber")

    @cached_property
    def a_side(self) -> PhaseSpace:
        base = list(self.base) + [(THETA_PREFIX + y, 1) for y in self.fiber]
        conj = [CONJ_PREFIX + n for n, _ in self.base] + [PSI_PREFIX + y for y in self.fiber]
        return phase_space(base, conj)

    @cached_property
    def b_side(self) -> PhaseSpace:
        return phase_space(list(self.base) + [(y, 0) for y in self.fiber])

    def theta(self, y: str) -> str:
        return THETA_PREFIX + y

    def psi(self, y: str) -> str:
        return PSI_PREFIX + y

    def eta(self, y: str) -> str:
        return CONJ_PREFIX + y

    @cached_property
    def _forward(self) -> dict:
        B = self.b_side
        img = {}
        for n, _ in self.base:
            img[n] = B.var(n)
            img[CONJ_PREFIX + n] = B.var(CONJ_PREFIX + n)
        for y in self.fiber:
            img[self.theta(y)] = -B.var(self.eta(y))
            img[self.psi(y)] = B.var(y)
        return img

    @cached_property
    def _backward(self) -> dict:
        A = self.a_side
        img = {}
        for n, _ in self.base:
            img[n] = A.var(n)
            img[CONJ_PREFIX + n] = A.var(CONJ_PREFIX + n)
        for y in self.fiber:
            img[self.eta(y)] = -A.var(self.theta(y))
            img[y] = A.var(self.psi(y))
        return img

    def fourier(self, g: GradedPoly) -> GradedPoly:
        if g.ctx != self.a_side:
            raise ValueError("element is not on the A side of this dictionary")
        return substitute(g, self.b_side, self._forward)

    def inverse(self, g: GradedPoly) -> GradedPoly:
        if g.ctx != self.b_side:
            raise ValueError("element is not on the B side of this dictionary")
        return substitute(g, self.a_side, self._backward)


def fourier(d: FourierDictionary, g: GradedPoly) -> GradedPoly:
    return d.fourier(g)


def fourier_inverse(d: FourierDictionary, g: GradedPoly) -> GradedPoly:
    return d.inverse(g)


def y_degree(d: FourierDictionary, m) -> int:
    B = d.b_side
    return sum(m[B.index(y)] for y in d.fiber)


def fourier_poisson_to_lambda(d: FourierDictionary, pi: GradedPoly, order: int) -> GradedPoly:
    """``F^{-1}`` of the y-Taylor truncation (y-degree <= ``order``) of a bivector."""
    B = d.b_side
    if pi.ctx != B:
        raise ValueError("Poisson element must live on the B side")
    for m in pi.terms:
        if B.conj_degree(m) != 2:
            raise ValueError("not a bivector")
    trunc = pi.filter(lambda m: y_degree(d, m) <= order)
    return d.inverse(trunc)
