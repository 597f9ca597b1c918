"""Exact linear solves over the rationals (sympy's DomainMatrix does the work)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _qq(x) -> "QQ":
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def solve_rational(mat: Sequence[Sequence], rhs: Sequence) -> list | None:
    """One solution of ``mat @ x = rhs`` with free variables set to zero, or ``None``."""
    n_rows = len(mat)
    n_cols = len(mat[0]) if n_rows else 0
    if n_cols == 0:
        return [] if all(Fraction(r) == 0 for r in rhs) else None
    rows = [[_qq(v) for v in row] + [_qq(r)] for row, r in zip(mat, rhs)]
    aug = DomainMatrix(rows, (n_rows, n_cols + 1), QQ)
    red, pivots = aug.rref()
    if n_cols in pivots:
        return None
    red = red.to_Matrix()
    sol = [Fraction(0)] * n_cols
    for r, c in enumerate(pivots):
        v = red[r, n_cols]
        sol[c] = Fraction(int(v.p), int(v.q))
    return sol


def rank_rational(mat: Sequence[Sequence]) -> int:
    if not mat or not mat[0]:
        return 0
    rows = [[_qq(v) for v in row] for row in mat]
    return DomainMatrix(rows, (len(rows), len(rows[0])), QQ).rank()
