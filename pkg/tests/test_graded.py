import itertools

import pytest
from hypothesis import given, settings

from helpers import MIXED, homogeneous, polys
from relform.graded import (ContextMismatch, GradedContext, GradedPoly, Tensor, UnknownVariable, alt_project,
                            left_partial, permutation_sign, permute_degrees, right_partial, sign_of)

X = MIXED


@given(homogeneous(X), homogeneous(X))
def test_graded_commutativity(a, b):
    s = -1 if (a.degree() * b.degree()) % 2 else 1
    assert a * b == (b * a) * s


@given(polys(X), polys(X), polys(X))
def test_associative_and_distributive(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@pytest.mark.parametrize("v", X.names)
@given(a=homogeneous(X), b=polys(X))
def test_left_leibniz(v, a, b):
    s = -1 if (X.degree_of(v) * a.degree()) % 2 else 1
    assert left_partial(a * b, v) == left_partial(a, v) * b + a * left_partial(b, v) * s


@pytest.mark.parametrize("v", X.names)
@given(a=polys(X), b=homogeneous(X))
def test_right_leibniz(v, a, b):
    s = -1 if (X.degree_of(v) * b.degree()) % 2 else 1
    assert right_partial(a * b, v) == a * right_partial(b, v) + right_partial(a, v) * b * s


@pytest.mark.parametrize("v", X.names)
@given(a=homogeneous(X))
def test_left_and_right_partials_differ_by_sign(v, a):
    s = -1 if ((a.degree() - X.degree_of(v)) * X.degree_of(v)) % 2 else 1
    assert right_partial(a, v) == left_partial(a, v) * s


def test_odd_squares_vanish():
    t = X.var("t1")
    assert (t * t).is_zero()
    assert X.var("t1") * X.var("t2") == -(X.var("t2") * X.var("t1"))
    assert (X.var("u") * X.var("u")).is_zero()  # degree -1 is odd
    Y = GradedContext.of(("w", 2))
    assert not (Y.var("w") * Y.var("w")).is_zero()


@given(polys(X, max_terms=2), polys(X, max_terms=2), polys(X, max_terms=2))
@settings(max_examples=30)
def test_alternation_is_idempotent(a, b, c):
    t = Tensor.pure(a, b, c)
    once = alt_project(t)
    assert alt_project(once) == once


def test_alternation_idempotent_arity_four():
    gens = [X.var(n) for n in ("x1", "t1", "t2", "u")]
    t = Tensor.pure(*gens) + Tensor.pure(gens[1], gens[0], gens[0], gens[3])
    once = alt_project(t)
    assert alt_project(once) == once
    assert not once.is_zero()


def _compose(s, t):
    # (s t)(a) = s(t(a)), one-based images
    return tuple(s[t[a] - 1] for a in range(len(t)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_permutation_sign_cocycle(n):
    for degs in itertools.product((0, 1, 2, -1), repeat=n):
        for s in itertools.permutations(range(1, n + 1)):
            for t in itertools.permutations(range(1, n + 1)):
                lhs = permutation_sign(_compose(s, t), degs)
                rhs = permutation_sign(s, permute_degrees(t, degs)) * permutation_sign(t, degs)
                assert lhs == rhs


def test_tensor_action_is_a_group_action():
    gens = [X.var(n) for n in ("t1", "x1", "t2")]
    tens = Tensor.pure(*gens)
    for s in itertools.permutations((1, 2, 3)):
        for t in itertools.permutations((1, 2, 3)):
            assert tens.permuted(t).permuted(s) == tens.permuted(_compose(s, t))


def test_sign_of_transposition():
    assert sign_of((2, 1, 3)) == -1
    assert sign_of((2, 3, 1)) == 1
    assert permutation_sign((2, 1), (1, 1)) == -1
    assert permutation_sign((2, 1), (1, 2)) == 1
    with pytest.raises(ValueError):
        permutation_sign((1, 1), (0, 0))


def test_context_errors():
    with pytest.raises(ValueError):
        GradedContext.of(("x", 0), ("x", 1))
    other = GradedContext.of(("x1", 0))
    with pytest.raises(ContextMismatch):
        X.var("x1") + other.var("x1")
    with pytest.raises(UnknownVariable):
        X.var("nope")


def test_degree_bookkeeping():
    p = X.var("x1") * X.var("t1") + X.var("u")
    assert p.homogeneous_components().keys() == {1, -1}
    assert GradedPoly(X, {X.unit(): 3}).constant_term() == 3
