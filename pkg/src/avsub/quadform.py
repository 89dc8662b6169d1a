"""Positive-definite integral quadratic forms and their ellipsoids.

A form is stored by the integer matrix ``gram2 = 2 * gram`` so that forms
such as ``x^2 + xy + y^2`` stay integral; ``Q(v) = v gram2 v^T / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import kernels
from .linalg import Matrix, StructuralError, det


@dataclass(frozen=True)
class GramForm:
    gram2: Matrix

    def __post_init__(self):
        g = self.gram2
        n = len(g)
        if any(len(r) != n for r in g):
            raise StructuralError("Gram matrix must be square")
        for i in range(n):
            if g[i][i] % 2:
                raise StructuralError("form is not integral on Z^H")
            for j in range(n):
                if g[i][j] != g[j][i]:
                    raise StructuralError("Gram matrix must be symmetric")
        for k in range(1, n + 1):
            if det([r[:k] for r in g[:k]]) <= 0:
                raise StructuralError("form is not positive definite")

    @classmethod
    def from_gram(cls, gram: Sequence[Sequence[Fraction | int]]) -> "GramForm":
        g2 = []
        for row in gram:
            out = []
            for x in row:
                y = Fraction(x) * 2
                if y.denominator != 1:
                    raise StructuralError("form is not integral on Z^H")
                out.append(int(y))
            g2.append(tuple(out))
        return cls(tuple(g2))

    @property
    def rank(self) -> int:
        return len(self.gram2)

    @property
    def gram(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(Fraction(x, 2) for x in r) for r in self.gram2)

    def __call__(self, v: Sequence[int]) -> int:
        g = self.gram2
        s = 0
        for i, vi in enumerate(v):
            if vi:
                s += vi * sum(g[i][j] * vj for j, vj in enumerate(v))
        return s // 2

    def restrict(self, basis: Matrix) -> "GramForm":
        """The form pulled back along the rows of ``basis``."""
        g = self.gram2
        rows = []
        for b in basis:
            gb = [sum(b[k] * g[k][j] for k in range(len(b))) for j in range(len(b))]
            rows.append(tuple(sum(x * y for x, y in zip(gb, c)) for c in basis))
        return GramForm(tuple(rows))

    @cached_property
    def levels(self) -> tuple[tuple[Matrix, ...], tuple[int, ...]]:
        """Scaled Schur complements used by the enumeration kernel."""
        g = self.gram2
        n = len(g)
        levels = []
        dets = []
        for i in range(n):
            tail = list(range(i + 1, n))
            head = list(range(i + 1))
            sub = [[g[r][c] for c in tail] for r in tail]
            d = det(sub)
            adj = _adjugate(sub)
            t = []
            for r in head:
                row = []
                for c in head:
                    corr = 0
                    for u, ru in enumerate(tail):
                        if g[r][ru]:
                            corr += g[r][ru] * sum(adj[u][w] * g[cw][c] for w, cw in enumerate(tail))
                    row.append(d * g[r][c] - corr)
                t.append(tuple(row))
            levels.append(tuple(t))
            dets.append(d)
        return tuple(levels), tuple(dets)


def _adjugate(m: list[list[int]]) -> list[list[int]]:
    n = len(m)
    if n == 0:
        return []
    if n == 1:
        return [[1]]
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(m) if k != i]
            out[j][i] = (-1) ** (i + j) * det(minor)
    return out


def enumerate_in_ellipsoid(q: GramForm, c: int) -> list[tuple[int, ...]]:
    """All integer ``v`` with ``Q(v) <= c``, lexicographically sorted."""
    if c < 0:
        return []
    levels, dets = q.levels
    return kernels.scan(levels, dets, 2 * int(c))


def count_in_ellipsoid(q: GramForm, c: int) -> int:
    if c < 0:
        return 0
    levels, dets = q.levels
    return kernels.scan(levels, dets, 2 * int(c), count_only=True)


def _floor_square(t: Fraction | int) -> int:
    t = Fraction(t)
    sq = t * t
    return sq.numerator // sq.denominator


def phi_count(q: GramForm, t: Fraction | int) -> int:
    """``#{v : Q(v) <= t^2}``."""
    return count_in_ellipsoid(q, _floor_square(t))


def ellipsoid_volume_estimate(q: GramForm, t: float) -> float:
    """Leading term ``vol{Q <= 1} * t^H``; reporting only."""
    h = q.rank
    unit_ball = math.pi ** (h / 2) / math.gamma(h / 2 + 1)
    gram_det = det(q.gram2) / 2 ** h
    return unit_ball * float(t) ** h / math.sqrt(gram_det)
