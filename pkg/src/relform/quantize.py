"""The A-infinity deformation ``mu = U(eps * lambda)`` and its curvature.

A :class:`FormalSeries` stores one :class:`WeightedOp` per power of ``eps``;
weights of graphs with two or more aerial vertices stay symbolic until a
result is evaluated.  Powers above ``K`` are dropped everywhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .derived import SubmanifoldSpec, structure_from_fourier
from .graded import GradedContext, GradedPoly
from .hochschild import MultiDiffOp, compose_at, format_op, gerstenhaber_bracket
from .kontsevich import U_n, default_weight_fn
from .linalg import solve_rational
from .multivector import check_poisson
from .weighted import NumericResult, WeightedOp, WeightedPoly, evaluate_op, wapply, wbilinear


class NotPoisson(ValueError):
    pass


class GaugeDegreeError(ValueError):
    pass


class NoGaugeSolution(RuntimeError):
    pass


@dataclass
class FormalSeries:
    ctx: GradedContext
    coefficients: dict
    K: int

    def __post_init__(self):
        self.coefficients = {k: v for k, v in self.coefficients.items() if k <= self.K and not v.is_zero()}

    def __getitem__(self, k: int) -> WeightedOp:
        return self.coefficients.get(k, WeightedOp(self.ctx))

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        K = min(self.K, other.K)
        out = {k: self[k] + other[k] for k in range(K + 1)}
        return FormalSeries(self.ctx, out, K)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "FormalSeries":
        return FormalSeries(self.ctx, {k: v * c for k, v in self.coefficients.items()}, self.K)

    def __eq__(self, other):
        return (isinstance(other, FormalSeries) and self.K == other.K
                and all(self[k] == other[k] for k in range(self.K + 1)))

    def arity(self, n: int) -> "FormalSeries":
        return FormalSeries(self.ctx, {k: v.component(n) for k, v in self.coefficients.items()}, self.K)

    def arities(self) -> list:
        return sorted(set().union(*(v.arities() for v in self.coefficients.values())) if self.coefficients else set())

    def keys(self) -> set:
        return set().union(*(v.keys() for v in self.coefficients.values())) if self.coefficients else set()

    def is_exact(self) -> bool:
        return not self.keys()

    def exact(self, k: int) -> MultiDiffOp:
        """The ``eps^k`` coefficient when it carries no undetermined weight."""
        c = self[k]
        if set(c.parts) - {()}:
            raise ValueError(f"coefficient of eps^{k} depends on numeric weights")
        return c.parts.get((), MultiDiffOp.zero(self.ctx))

    def substitute(self, exact_values: Mapping) -> "FormalSeries":
        return FormalSeries(self.ctx, {k: v.substitute(exact_values) for k, v in self.coefficients.items()}, self.K)

    def evaluate(self, k: int, weight_fn: Callable | None = None) -> NumericResult:
        return evaluate_op(self[k], weight_fn or default_weight_fn())

    def __call__(self, *args) -> dict:
        """``{power: WeightedPoly}`` for the arity ``len(args)`` part applied to ``args``."""
        return apply_series(self, [{0: a} for a in args])


def _as_wpoly(a) -> WeightedPoly:
    return a if isinstance(a, WeightedPoly) else WeightedPoly.exact(a)


def apply_series(mu: FormalSeries, args: Sequence[Mapping]) -> dict:
    """Apply ``mu`` to arguments that are series ``{power: poly}``, truncating at ``K``."""
    out: dict = {}
    arg_items = [sorted(a.items()) for a in args]
    for k0, op in mu.coefficients.items():
        comp = op.component(len(args))
        if comp.is_zero():
            continue
        for choice in itertools.product(*arg_items):
            k = k0 + sum(p for p, _ in choice)
            if k > mu.K:
                continue
            val = wapply(comp, [_as_wpoly(x) for _, x in choice])
            if not val.is_zero():
                out[k] = out[k] + val if k in out else val
    return out


def lambda_multivector(pi: GradedPoly, spec: SubmanifoldSpec) -> GradedPoly:
    """The A-side multivector of the P-infinity structure (all orders)."""
    return structure_from_fourier(pi, spec).multivector()


def star_assemble(pi: GradedPoly, spec: SubmanifoldSpec, K: int = 2, max_arity: int | None = None) -> FormalSeries:
    """``mu_A + sum_{n=1..K} eps^n / n! U_n(lambda, ..., lambda)``.

    ``pi`` is a bivector on the B side of ``spec``.  ``max_arity`` drops
    operator components of higher arity (and the graphs feeding them).
    """
    if not check_poisson(pi):
        raise NotPoisson("pi does not satisfy [pi, pi] = 0")
    if K < 0:
        raise ValueError("order must be non-negative")
    lam = lambda_multivector(pi, spec)
    A = spec.a_side.base
    coefs = {0: WeightedOp.exact(MultiDiffOp.product(A))}
    if lam.is_zero():
        return FormalSeries(A, coefs, K)
    for n in range(1, K + 1):
        if max_arity is None:
            u = U_n([lam] * n)
        else:
            u = WeightedOp(A)
            for m in range(max_arity + 1):
                u = u + U_n([lam] * n, m)
        coefs[n] = u * Fraction(1, math.factorial(n))
    return FormalSeries(A, coefs, K)


# -- A-infinity relations ---------------------------------------------------

def stasheff_sign(n: int) -> int:
    return -1 if ((n - 1) * (n - 2) // 2) % 2 else 1


def to_stasheff(mu: FormalSeries) -> FormalSeries:
    """Rescale ``mu_n`` by ``(-1)^{(n-1)(n-2)/2}`` (an involution).

    ``mu = U(eps lambda)`` solves ``[mu, mu] = 0`` for the Gerstenhaber
    bracket; the rescaled maps satisfy the associativity relations in their
    displayed sign convention.  ``mu_1`` and ``mu_2`` are unchanged.
    """
    out = {}
    for k, op in mu.coefficients.items():
        acc = WeightedOp(mu.ctx)
        for n in op.arities():
            acc = acc + op.component(n) * stasheff_sign(n)
        out[k] = acc
    return FormalSeries(mu.ctx, out, mu.K)


def _homogeneous_choices(args: Sequence) -> list:
    split = []
    for a in args:
        parts = list(a.homogeneous_components().items())
        split.append(parts or [(0, a)])
    return list(itertools.product(*split))


def a_infinity_residual(mu: FormalSeries, args: Sequence[GradedPoly], n: int | None = None) -> dict:
    """``{power: WeightedPoly}`` of the associativity relation on ``args``.

    ``sum_q (-1)^{q(n-q)} sum_j (-1)^{(q-1) j + q sum_{i<=j} |a_i|}
    m_{n-q+1}(a_1..a_j, m_q(a_{j+1}..a_{j+q}), ..)`` with ``m = to_stasheff(mu)``.
    """
    if n is not None and n != len(args):
        raise ValueError(f"expected {n} arguments, got {len(args)}")
    n = len(args)
    mu = to_stasheff(mu)
    out: dict = {}
    for choice in _homogeneous_choices(args):
        degs = [d for d, _ in choice]
        a = [{0: p} for _, p in choice]
        for q in range(n + 1):
            for j in range(n - q + 1):
                inner = apply_series(mu, a[j:j + q])
                if not inner:
                    continue
                e = q * (n - q) + (q - 1) * j + q * sum(degs[:j])
                val = apply_series(mu, a[:j] + [inner] + a[j + q:])
                for k, v in val.items():
                    v = -v if e % 2 else v
                    out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if not v.is_zero()}


def mc_residual(mu: FormalSeries) -> FormalSeries:
    """``[mu, mu]`` in the Gerstenhaber bracket, order by order."""
    out = {}
    for k in range(mu.K + 1):
        acc = WeightedOp(mu.ctx)
        for k1 in range(k + 1):
            if k1 in mu.coefficients and (k - k1) in mu.coefficients:
                acc = acc + wbilinear(gerstenhaber_bracket, mu[k1], mu[k - k1])
        out[k] = acc
    return FormalSeries(mu.ctx, out, mu.K)


def mc_residual_on(mu: FormalSeries, args: Sequence[GradedPoly]) -> dict:
    """``(-1)^{(n-1)(n-2)/2} [mu, mu] / 2`` on ``n`` arguments.

    Term by term this is :func:`a_infinity_residual`: the Gerstenhaber
    composition signs and the associativity signs differ by
    ``(-1)^{(n-q)(q-1)}``, which the rescaling of :func:`to_stasheff` absorbs.
    """
    n = len(args)
    return mc_residual(mu).scale(Fraction(stasheff_sign(n), 2))(*args)


def residual_is_zero(res: Mapping, weight_fn: Callable | None = None, n_sigma: float = 3.0) -> bool:
    """Exact zero where no weights enter, otherwise within ``n_sigma`` errors."""
    weight_fn = weight_fn or default_weight_fn()
    for v in res.values():
        if v.is_zero():
            continue
        if v.is_exact():
            return False
        if not v.evaluate(weight_fn).within(n_sigma):
            return False
    return True


# -- curvature and gauge ----------------------------------------------------

@dataclass
class Anomaly:
    """``mu_0 = eps * first + eps^2 * F + ...`` and the closedness data of ``F``.

    ``closure`` is ``d F + mu_1^(2)(mu_0^(1))``, the ``eps^3`` part of
    ``mu_1(mu_0) = 0``; for a coisotropic submanifold the second term is
    absent and this is ``lambda_1 F``.
    """

    first: GradedPoly
    F: WeightedPoly
    dF: WeightedPoly
    closure: WeightedPoly
    closed: bool
    F_value: NumericResult | None
    closure_value: NumericResult | None


def _exact_or_within(p: WeightedPoly, weight_fn, n_sigma: float):
    if p.is_exact():
        return p.exact_part().is_zero(), None
    val = p.evaluate(weight_fn)
    return val.within(n_sigma), val


def mu0_anomaly(mu: FormalSeries, weight_fn: Callable | None = None, n_sigma: float = 3.0) -> Anomaly:
    if mu.K < 2:
        raise ValueError("the anomaly needs mu assembled to order eps^2")
    weight_fn = weight_fn or default_weight_fn()
    A = mu.ctx
    zero = WeightedPoly(A)
    first = wapply(mu[1], []) if 0 in mu[1].arities() else zero
    if not first.is_exact():
        raise ValueError("eps^1 curvature should be exact")
    F = wapply(mu[2], []) if 0 in mu[2].arities() else zero
    d = mu[1].component(1)
    dF = wapply(d, [F]) if not F.is_zero() else zero
    corr = wapply(mu[2].component(1), [first]) if not first.is_zero() else zero
    closure = dF + corr
    closed, cval = _exact_or_within(closure, weight_fn, n_sigma)
    fval = None if F.is_exact() else F.evaluate(weight_fn)
    return Anomaly(first.exact_part(), F, dF, closure, closed, fval, cval)


def _placements(n: int, k: int):
    """Positions of ``k`` inserted elements among ``n + k`` slots."""
    return itertools.combinations(range(n + k), k)


def apply_gauge(mu: FormalSeries, a: Mapping) -> FormalSeries:
    """Conjugate by the coalgebra automorphism with ``T_0 = a``, ``T_1 = id``.

    ``a`` maps powers ``>= 1`` of ``eps`` to degree-one elements.  In the
    shifted convention ``a`` has degree zero and is inserted into every
    possible set of extra slots of ``b_{n+k}`` without signs.  Translated to
    the convention of :func:`to_stasheff` a placement with arguments ``x_i``
    carries ``(-1)^{sum_i (#a after x_i)|x_i| + sum_a (#entries after a)}``;
    the Koszul part is produced by the insertion itself, which leaves
    ``(-1)^{sum_a (#x before a)}`` times the constant ``(-1)^{kn + k(k-1)/2}``.
    """
    A = mu.ctx
    a = {k: v for k, v in a.items() if not v.is_zero()}
    for k, v in a.items():
        if k < 1:
            raise GaugeDegreeError("the gauge element must start at order eps")
        if set(v.homogeneous_components()) != {1}:
            raise GaugeDegreeError("the gauge element must have degree 1")
    if not a:
        return mu
    a_ops = {k: MultiDiffOp.from_poly(v) for k, v in a.items()}
    mu = to_stasheff(mu)
    arities = mu.arities()
    out: dict = {}
    for k0, op in mu.coefficients.items():
        for total in arities:
            comp = op.component(total)
            if comp.is_zero():
                continue
            for kk in range(0, total + 1):
                n = total - kk
                if kk and k0 + kk > mu.K:
                    continue
                for pos in _placements(n, kk):
                    pos_set = set(pos)
                    before = 0
                    sign = 0
                    for s in range(total):
                        if s in pos_set:
                            sign += before
                        else:
                            before += 1
                    # constant left over from passing through the shifted convention
                    sign += kk * n + kk * (kk - 1) // 2
                    for powers in itertools.product(sorted(a_ops), repeat=kk):
                        k = k0 + sum(powers)
                        if k > mu.K:
                            continue
                        term = comp
                        # left to right, so the inserted coefficients multiply in slot order
                        for done, (p, pw) in enumerate(zip(pos, powers)):
                            term = term.map(lambda o, p=p - done, pw=pw: compose_at(o, p, a_ops[pw]))
                        term = term * (-1 if sign % 2 else 1)
                        out[k] = out[k] + term if k in out else term
    return to_stasheff(FormalSeries(A, out, mu.K))


def gauge_step(mu: FormalSeries, max_degree: int, weight_fn: Callable | None = None) -> GradedPoly:
    """First gauge step: ``a_1`` of degree one, polynomial degree ``<= max_degree``.

    In the convention of :func:`to_stasheff` the curvature is ``m_0 = -mu_0``
    and the lowest-order equation ``m_0^(2) + d a_1 = 0`` reads ``d a_1 = F``
    with ``F`` the ``eps^2`` part of ``mu_0``.

    Numeric weights in ``F`` are replaced by their estimates (rounded to
    nearby small-denominator rationals), so the solution is exact for that
    ``F``.
    """
    anomaly = mu0_anomaly(mu, weight_fn)
    A = mu.ctx
    if anomaly.F.is_zero():
        return A.zero()
    if anomaly.F.is_exact():
        F = anomaly.F.exact_part()
    else:
        F = GradedPoly(A, {m: Fraction(v).limit_denominator(10 ** 4) for m, v in anomaly.F_value.values.items()})
    d = mu.exact(1).component(1)
    basis = [m for m in A.monomials(max_degree) if A.mono_degree(m) == 1]
    images = [d(GradedPoly(A, {m: 1})) for m in basis]
    rows = sorted(set(F.terms).union(*(im.terms for im in images)), key=repr)
    mat = [[im.terms.get(r, Fraction(0)) for im in images] for r in rows]
    rhs = [F.terms.get(r, Fraction(0)) * stasheff_sign(0) * -1 for r in rows]
    sol = solve_rational(mat, rhs)
    if sol is None:
        raise NoGaugeSolution("F is not d-exact in the truncated space")
    return GradedPoly(A, {m: c for m, c in zip(basis, sol) if c})


def format_series(mu: FormalSeries, weight_fn: Callable | None = None) -> str:
    """Coefficients per power and arity; weighted parts are evaluated."""
    lines = []
    for k in range(mu.K + 1):
        c = mu[k]
        for m in sorted(c.arities()):
            part = c.component(m)
            if set(part.parts) <= {()}:
                body = format_op(part.parts.get((), MultiDiffOp.zero(mu.ctx)))
            else:
                body = str(evaluate_op(part, weight_fn or default_weight_fn()))
            lines.append(f"eps^{k} arity {m}: {body}")
    return "\n".join(lines)
