"""Admissible graphs, edge operators, configuration-space weights and ``U_n``.

Vertices are numbered internally ``0..n-1`` (aerial) and ``n..n+m-1``
(ground).  Each aerial vertex carries an ordered list of distinct targets;
the edge order of a graph is vertex by vertex, in list order.  ``U_n`` sums
over canonical graphs (increasing target lists) only, since a graph is an
edge set and reordering changes the form and the operator by the same sign.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .graded import GradedContext, GradedPoly, left_partial, mono_mul
from .hochschild import MultiDiffOp, partials_context
from .multivector import PhaseSpace, schouten
from .weighted import WeightedOp, wbilinear

DEFAULT_SAMPLES = 2 ** 20
DEFAULT_REPLICATES = 16


@dataclass(frozen=True)
class KGraph:
    n: int
    m: int
    out_edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "out_edges", tuple(tuple(int(t) for t in ts) for ts in self.out_edges))
        if len(self.out_edges) != self.n:
            raise ValueError("one target list per aerial vertex is required")
        for i, ts in enumerate(self.out_edges):
            if len(set(ts)) != len(ts):
                raise ValueError(f"vertex {i + 1} repeats a target")
            for t in ts:
                if t == i or not 0 <= t < self.n + self.m:
                    raise ValueError(f"illegal edge {i} -> {t}")

    @cached_property
    def edges(self) -> tuple:
        return tuple((i, t) for i, ts in enumerate(self.out_edges) for t in ts)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def out_degrees(self) -> tuple:
        return tuple(len(ts) for ts in self.out_edges)

    def is_admissible(self) -> bool:
        return self.n_edges == 2 * self.n + self.m - 2

    def canonical(self) -> tuple:
        """``(sign, canonical graph)`` with the sign of the edge reordering."""
        sign = 1
        for ts in self.out_edges:
            sign *= _perm_sign(ts)
        return sign, KGraph(self.n, self.m, tuple(tuple(sorted(ts)) for ts in self.out_edges))

    def label(self, t: int) -> str:
        return f"a{t + 1}" if t < self.n else f"g{t - self.n + 1}"

    def lines(self) -> list:
        return [f"v{i + 1}: " + ",".join(self.label(t) for t in ts) for i, ts in enumerate(self.out_edges)]

    def __str__(self):
        return "; ".join(self.lines()) if self.n else "(empty)"

    def __repr__(self):
        return f"KGraph({self.n},{self.m},{self.out_edges})"


def _perm_sign(seq: Sequence) -> int:
    s = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            s += seq[a] > seq[b]
    return -1 if s % 2 else 1


def enumerate_graphs(n: int, m: int, out_degrees: Sequence[int], canonical_only: bool = False,
                     formality: bool = True) -> list:
    """All graphs with vertex ``i`` emitting ``out_degrees[i]`` ordered distinct targets."""
    if n < 0 or m < 0 or 2 * n + m < 2:
        raise ValueError("need n, m >= 0 and 2n + m >= 2")
    if len(out_degrees) != n:
        raise ValueError("one out-degree per aerial vertex")
    if formality and sum(out_degrees) != 2 * n + m - 2:
        return []
    choices = []
    for i, p in enumerate(out_degrees):
        targets = [t for t in range(n + m) if t != i]
        gen = itertools.combinations(targets, p) if canonical_only else itertools.permutations(targets, p)
        choices.append(list(gen))
    graphs = [KGraph(n, m, combo) for combo in itertools.product(*choices)]
    return sorted(graphs, key=lambda g: g.out_edges)


# -- edge operators ---------------------------------------------------------

def _split_parity(g: GradedPoly) -> list:
    return list(g.parity_components().values())


def graph_operator_symbolic(graph: KGraph, gammas: Sequence[GradedPoly]) -> MultiDiffOp:
    """``eps mu o tau_{e_1} ... tau_{e_k}`` as an operator in the ground slots.

    Ground slots carry monomials in partial derivatives; the Koszul signs
    from the (unknown) ground arguments are produced later when the
    operator is applied.
    """
    if len(gammas) != graph.n:
        raise ValueError("one multivector per aerial vertex")
    ps = gammas[0].ctx if gammas else None
    if not isinstance(ps, PhaseSpace):
        raise TypeError("multivectors must live in a PhaseSpace")
    A = ps.base
    P = partials_context(A)
    d = ps.n_base
    n, m = graph.n, graph.m
    eps = A.degrees
    # state: (aerial polys, ground derivative monomials) -> coefficient
    states = []
    for combo in itertools.product(*(_split_parity(g) for g in gammas)):
        states.append((tuple(combo), (P.unit(),) * m, 1))
    for (i, j) in reversed(graph.edges):
        new = []
        for aer, gnd, c in states:
            par = [a.ctx.mono_parity(next(iter(a.terms))) if a else 0 for a in aer]
            par += [P.mono_parity(D) for D in gnd]
            for alpha in range(d):
                s = -1 if eps[alpha] % 2 else 1
                # d/dtheta_alpha on aerial slot i
                a_i = left_partial(aer[i], ps.names[d + alpha])
                if not a_i:
                    continue
                pth = (eps[alpha] - 1) % 2
                s *= -1 if (pth * sum(par[:i])) % 2 else 1
                px = eps[alpha] % 2
                aer2 = list(aer)
                aer2[i] = a_i
                gnd2 = list(gnd)
                before_j = sum(par[:j])
                s *= -1 if (px * before_j) % 2 else 1
                if j < n:
                    a_j = left_partial(aer2[j], ps.names[alpha])
                    if not a_j:
                        continue
                    aer2[j] = a_j
                else:
                    e = [0] * d
                    e[alpha] = 1
                    r = mono_mul(P, tuple(e), gnd2[j - n])
                    if r is None:
                        continue
                    s *= r[0]
                    gnd2[j - n] = r[1]
                new.append((tuple(aer2), tuple(gnd2), c * s))
        states = new
        if not states:
            return MultiDiffOp.zero(A)
    out: dict = {}
    for aer, gnd, c in states:
        prod = ps.const(c)
        for a in aer:
            prod = prod * a
            if not prod:
                break
        base = ps.restrict(prod)
        for mono, v in base.terms.items():
            key = (mono, gnd)
            out[key] = out.get(key, 0) + v
    return MultiDiffOp(A, out)


def graph_operator(graph: KGraph, gammas: Sequence[GradedPoly], fs: Sequence[GradedPoly]) -> GradedPoly:
    """Concrete evaluation: every slot holds an actual polynomial."""
    if len(gammas) != graph.n or len(fs) != graph.m:
        raise ValueError("arity mismatch")
    ps = gammas[0].ctx
    d = ps.n_base
    n = graph.n
    eps = ps.base.degrees
    slots0 = [_split_parity(g) for g in gammas] + [_split_parity(ps.embed(f)) for f in fs]
    states = [(tuple(c), 1) for c in itertools.product(*slots0)]
    for (i, j) in reversed(graph.edges):
        new = []
        for vals, c in states:
            par = [ps.mono_parity(next(iter(v.terms))) if v else 0 for v in vals]
            for alpha in range(d):
                s = -1 if eps[alpha] % 2 else 1
                v_i = left_partial(vals[i], ps.names[d + alpha])
                if not v_i:
                    continue
                pth = (eps[alpha] - 1) % 2
                s *= -1 if (pth * sum(par[:i])) % 2 else 1
                px = eps[alpha] % 2
                before_j = sum(par[:j])
                s *= -1 if (px * before_j) % 2 else 1
                vals2 = list(vals)
                vals2[i] = v_i
                v_j = left_partial(vals2[j], ps.names[alpha])
                if not v_j:
                    continue
                vals2[j] = v_j
                new.append((tuple(vals2), c * s))
        states = new
    out = ps.zero()
    for vals, c in states:
        prod = ps.const(c)
        for v in vals:
            prod = prod * v
        out = out + prod
    return ps.restrict(out)


# -- weights ----------------------------------------------------------------

@dataclass(frozen=True)
class GraphWeight:
    value: object
    error: float = 0.0
    method: str = "exact"
    samples: int = 0

    @property
    def is_exact(self) -> bool:
        return self.method == "exact"

    def __float__(self):
        return float(self.value)

    def __str__(self):
        v = f"{self.value}" if self.is_exact else f"{self.value:.6f}"
        return f"w={v} err={self.error:.2g} method={self.method}"


# Charts for one aerial point.  ``disc`` around ``c`` in H is the Moebius
# disc w = (z - c)/(z - conj c) in polar coordinates; ``strip`` anchored at a
# real point ``a`` is log((z - a)/(1 - z + a)).  Each chart's Jacobian
# cancels the 1/r pole of an edge ending at (or starting from) its anchor.

def _disc_sample(c, s1, s2):
    w = s1 * np.exp(2j * np.pi * s2)
    return (c - np.conj(c) * w) / (1.0 - w)


def _disc_density(c, z):
    w = (z - c) / (z - np.conj(c))
    dz_dw = (c - np.conj(c)) / (1.0 - w) ** 2
    return 1.0 / (2 * np.pi * np.abs(w) * np.abs(dz_dw) ** 2)


def _strip_sample(a, s1, s2):
    q = np.exp(np.log(s1 / (1.0 - s1)) + 1j * np.pi * s2)
    return a + q / (1.0 + q)


def _strip_density(a, z):
    q = (z - a) / (1.0 - (z - a))
    aq = np.abs(q)
    jac = np.abs(q / (1.0 + q) ** 2) ** 2 * np.pi * (1.0 + aq) ** 2 / aq
    return 1.0 / jac


def _edge_jacobian(graph: KGraph, z: np.ndarray, dz: np.ndarray) -> np.ndarray:
    N, _, k = dz.shape
    J = np.empty((N, k, k))
    for e, (i, j) in enumerate(graph.edges):
        w1 = (z[:, i] - z[:, j])[:, None]
        w2 = (np.conj(z[:, i]) - z[:, j])[:, None]
        J[:, e, :] = np.imag((dz[:, i, :] - dz[:, j, :]) / w1) - np.imag((np.conj(dz[:, i, :]) - dz[:, j, :]) / w2)
    return np.linalg.det(J)


def _charts(graph: KGraph, ground_gauge: bool) -> list:
    """Per free aerial point: ``[(kind, anchor vertex or None), ...]``."""
    n, m = graph.n, graph.m
    adj = [set() for _ in range(n + m)]
    for i, j in graph.edges:
        adj[i].add(j)
        adj[j].add(i)
    free_ground = range(n + 1, n + m - 1) if ground_gauge else range(n, n + m)
    out = []
    for p in range(0 if ground_gauge else 1, n):
        charts = [("strip", None)] if ground_gauge else [("disc", 0)]
        charts += [("disc", q) for q in range(1 if not ground_gauge else 0, p) if q in adj[p]]
        charts += [("strip", v) for v in free_ground if v in adj[p]]
        out.append((p, charts))
    return out


def _n_dims(graph: KGraph) -> int:
    extra = sum(len(c) > 1 for _, c in _charts(graph, graph.m >= 2))
    return graph.n_edges + extra


def _integrand(graph: KGraph, u: np.ndarray) -> np.ndarray:
    """Form density over the sampling density at cube points ``u`` (rows).

    With two or more ground points the first and last are fixed at 0 and 1
    (orientation ``(-1)^m``); otherwise the first aerial point sits at ``i``.
    Free ground points are sorted uniform (0, 1) or tangent-mapped draws, and
    each free aerial point comes from an equal mixture of charts, one per
    nearby singularity, chosen by an extra selector coordinate.
    """
    n, m = graph.n, graph.m
    N = len(u)
    k = graph.n_edges
    ground = m >= 2
    z = np.empty((N, n + m), dtype=complex)
    dz = np.zeros((N, n + m, k), dtype=complex)
    log_q = np.zeros(N)
    if ground:
        z[:, n] = 0.0
        z[:, n + m - 1] = 1.0
        free_ground = list(range(n + 1, n + m - 1))
    else:
        z[:, 0] = 1j
        free_ground = list(range(n, n + m))
    col = 0
    nfg = len(free_ground)
    if nfg:
        g = np.sort(u[:, :nfg], axis=1)
        log_q += math.log(math.factorial(nfg))
        if ground:
            z[:, free_ground] = g
        else:
            ang = np.pi * (2.0 * g - 1.0) / 2.0
            z[:, free_ground] = np.tan(ang)
            log_q += np.sum(np.log(np.cos(ang) ** 2 / np.pi), axis=1)
        for b, v in enumerate(free_ground):
            dz[:, v, b] = 1.0
        col = nfg
    sel = k
    for p, charts in _charts(graph, ground):
        s1, s2 = u[:, col], u[:, col + 1]
        anchors = []
        for kind, v in charts:
            if kind == "disc":
                anchors.append((kind, z[:, v]))
            else:
                anchors.append((kind, 0.0 if v is None else z[:, v].real))
        samples = [_disc_sample(c, s1, s2) if kind == "disc" else _strip_sample(c, s1, s2) for kind, c in anchors]
        if len(samples) == 1:
            zp = samples[0]
        else:
            idx = np.minimum((u[:, sel] * len(samples)).astype(int), len(samples) - 1)
            zp = np.choose(idx, samples)
            sel += 1
        dens = sum(_disc_density(c, zp) if kind == "disc" else _strip_density(c, zp) for kind, c in anchors)
        log_q += np.log(dens / len(anchors))
        z[:, p] = zp
        dz[:, p, col] = 1.0
        dz[:, p, col + 1] = 1j
        col += 2
    sign = -1 if (ground and m % 2) else 1
    return sign * _edge_jacobian(graph, z, dz) * np.exp(-log_q) / (2 * np.pi) ** k


@lru_cache(maxsize=None)
def _qmc_weight(graph: KGraph, samples: int, replicates: int, seed: int) -> GraphWeight:
    k = _n_dims(graph)
    per = max(1, samples // replicates)
    log2 = max(1, int(round(math.log2(per))))
    rng = np.random.default_rng(seed)
    means = []
    for _ in range(replicates):
        sob = qmc.Sobol(d=k, scramble=True, seed=rng)
        u = sob.random_base2(log2)
        u = np.clip(u, 1e-15, 1 - 1e-15)
        acc = 0.0
        for start in range(0, len(u), 1 << 15):
            vals = _integrand(graph, u[start:start + (1 << 15)])
            acc += float(np.sum(vals[np.isfinite(vals)]))
        means.append(acc / len(u))
    means = np.array(means)
    err = float(means.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else float("nan")
    return GraphWeight(float(means.mean()), err, "quasi-monte-carlo", replicates * (1 << log2))


def weight(graph: KGraph, samples: int = DEFAULT_SAMPLES, replicates: int = DEFAULT_REPLICATES,
           seed: int = 0) -> GraphWeight:
    """``int prod_e dphi_e / 2pi`` over the configuration space, in stored edge order."""
    if not graph.is_admissible():
        return GraphWeight(Fraction(0))
    if graph.n == 1:
        return GraphWeight(Fraction(_perm_sign(graph.out_edges[0]), math.factorial(graph.m)))
    sign, canon = graph.canonical()
    w = _qmc_weight(canon, samples, replicates, seed)
    if sign == 1:
        return w
    return GraphWeight(-w.value, w.error, w.method, w.samples)


# -- U_n --------------------------------------------------------------------

def _order_parts(ps: PhaseSpace, g: GradedPoly) -> dict:
    """``{(order, degree): part}``."""
    out: dict = {}
    for mono, c in g.terms.items():
        out.setdefault((ps.conj_degree(mono), ps.mono_degree(mono)), {})[mono] = c
    return {k: GradedPoly(ps, v) for k, v in out.items()}


def U_n(gammas: Sequence[GradedPoly], m: int | None = None) -> WeightedOp:
    """``sum_m (-1)^{(sum|gamma_i| - 1) m} sum_Gamma U_Gamma`` with symbolic weights.

    Exact weights (one aerial vertex) are folded into the coefficients; the
    other graphs contribute under the key ``(Gamma,)``.  Restrict to arity
    ``m`` if given.
    """
    ps = gammas[0].ctx
    A = ps.base
    n = len(gammas)
    out = WeightedOp(A)
    split = [list(_order_parts(ps, g).items()) for g in gammas]
    for choice in itertools.product(*split):
        orders = tuple(k[0] for k, _ in choice)
        degs = sum(k[1] for k, _ in choice)
        mm = sum(orders) - 2 * n + 2
        if mm < 0 or (m is not None and mm != m):
            continue
        gsign = -1 if ((degs - 1) * mm) % 2 else 1
        parts = [g for _, g in choice]
        for graph in enumerate_graphs(n, mm, orders, canonical_only=True):
            op = graph_operator_symbolic(graph, parts)
            if op.is_zero():
                continue
            k = graph.n_edges
            s = gsign * (-1 if (k * (k - 1) // 2) % 2 else 1)
            if n == 1:
                out = out + WeightedOp.exact(op * (s * weight(graph).value))
            else:
                out = out + WeightedOp(A, {(graph,): op * s})
    return out


def default_weight_fn(samples: int = DEFAULT_SAMPLES, replicates: int = DEFAULT_REPLICATES, seed: int = 0):
    def fn(graph: KGraph) -> GraphWeight:
        return weight(graph, samples, replicates, seed)
    return fn


# -- formality residual ----------------------------------------------------

def _tshift(g: GradedPoly) -> int:
    """Degree in T(A)[1]: polynomial degree minus two."""
    return g.degree() - 2


def _dshift_parts(op: MultiDiffOp) -> list:
    """Homogeneous pieces with their degree in D(A)[1]."""
    return [(d + a - 2, part) for (a, d), part in op.components().items()]


def _Q2_ops(x: MultiDiffOp, y: MultiDiffOp) -> MultiDiffOp:
    from .hochschild import gerstenhaber_bracket
    out = MultiDiffOp.zero(x.ctx)
    for dx, px in _dshift_parts(x):
        out = out + gerstenhaber_bracket(px, y) * (-1 if dx % 2 else 1)
    return out


def formality_residual(n: int, gammas: Sequence[GradedPoly]) -> WeightedOp:
    """LHS minus RHS of the quadratic formality relation with ``U_0 = mu``.

    Homogeneous ``gammas`` only; ``n`` is 1 or 2.
    """
    if n not in (1, 2) or len(gammas) != n:
        raise ValueError("formality_residual supports n = 1, 2 with n multivectors")
    ps = gammas[0].ctx
    A = ps.base
    mu = WeightedOp.exact(MultiDiffOp.product(A))
    Q2 = lambda a, b: wbilinear(_Q2_ops, a, b)
    if n == 1:
        u1 = U_n([gammas[0]])
        return Q2(mu, u1) + Q2(u1, mu)
    g1, g2 = gammas
    u2 = U_n([g1, g2])
    a, b = U_n([g1]), U_n([g2])
    sw = -1 if (_tshift(g1) * _tshift(g2)) % 2 else 1
    lhs = Q2(mu, u2) + Q2(u2, mu) + Q2(a, b) + Q2(b, a) * sw
    # both sides are evaluated on the full symmetric tensor, so the bracket
    # term appears once for each of the two orderings, with equal signs
    q = schouten(g1, g2) * (-2 if _tshift(g1) % 2 else 2)
    rhs = U_n([q]) if not q.is_zero() else WeightedOp(A)
    return lhs - rhs
