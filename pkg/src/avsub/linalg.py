"""Exact integer and rational linear algebra.

Matrices are tuples of row tuples of Python ints. Nothing here touches
floating point; every routine is exact at arbitrary precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Matrix = tuple[tuple[int, ...], ...]


class StructuralError(ValueError):
    """Input has the wrong shape or violates a structural precondition."""


def as_matrix(rows: Iterable[Iterable[int]]) -> Matrix:
    m = tuple(tuple(int(x) for x in r) for r in rows)
    if m and len({len(r) for r in m}) != 1:
        raise StructuralError("ragged matrix")
    return m


def ncols(m: Matrix, default: int = 0) -> int:
    return len(m[0]) if m else default


def transpose(m: Matrix, cols: int | None = None) -> Matrix:
    if not m:
        return tuple(() for _ in range(cols or 0))
    return tuple(zip(*m))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(r, c)) for c in bt) for r in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _hnf_rows(rows: list[list[int]], ncol: int, track: list[list[int]] | None):
    """In-place row HNF; ``track`` receives the same row operations."""
    r = 0
    nrow = len(rows)
    pivots = []
    for c in range(ncol):
        if r == nrow:
            break
        # clear column c below row r with gcd steps
        for i in range(r + 1, nrow):
            if rows[i][c] == 0:
                continue
            a, b = rows[r][c], rows[i][c]
            if a == 0:
                rows[r], rows[i] = rows[i], rows[r]
                if track is not None:
                    track[r], track[i] = track[i], track[r]
                continue
            g, x, y = xgcd(a, b)
            u, v = -b // g, a // g
            ra, rb = rows[r], rows[i]
            rows[r] = [x * p + y * q for p, q in zip(ra, rb)]
            rows[i] = [u * p + v * q for p, q in zip(ra, rb)]
            if track is not None:
                ta, tb = track[r], track[i]
                track[r] = [x * p + y * q for p, q in zip(ta, tb)]
                track[i] = [u * p + v * q for p, q in zip(ta, tb)]
        if rows[r][c] == 0:
            continue
        if rows[r][c] < 0:
            rows[r] = [-x for x in rows[r]]
            if track is not None:
                track[r] = [-x for x in track[r]]
        p = rows[r][c]
        for i in range(r):
            q = rows[i][c] // p
            if q:
                rows[i] = [x - q * y for x, y in zip(rows[i], rows[r])]
                if track is not None:
                    track[i] = [x - q * y for x, y in zip(track[i], track[r])]
        pivots.append(c)
        r += 1
    return r, pivots


def hnf(m: Sequence[Sequence[int]]) -> tuple[Matrix, int]:
    """Row Hermite normal form of the row span of ``m`` and its rank.

    Pivots are positive and entries above a pivot lie in ``[0, pivot)``,
    so equal row spans give identical output. Zero rows are dropped.
    """
    rows = [list(r) for r in m]
    if not rows:
        return (), 0
    rank, _ = _hnf_rows(rows, len(rows[0]), None)
    return tuple(tuple(r) for r in rows[:rank]), rank


def hnf_with_transform(m: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, int]:
    """Return ``(h, u, rank)`` with ``u`` unimodular and ``u * m`` equal to
    ``h`` padded with zero rows; the rows of ``u`` past ``rank`` span the
    integer left kernel of ``m``."""
    rows = [list(r) for r in m]
    n = len(rows)
    track = [list(r) for r in identity(n)]
    if not rows or not rows[0]:
        return (), tuple(map(tuple, track)), 0
    rank, _ = _hnf_rows(rows, len(rows[0]), track)
    return (tuple(tuple(r) for r in rows), tuple(tuple(r) for r in track), rank)


def left_kernel(m: Matrix, nrows: int) -> Matrix:
    """Integer basis (in HNF) of ``{x in Z^nrows : x * m = 0}``.

    ``m`` has ``nrows`` rows; it may have zero columns, in which case the
    kernel is everything.
    """
    if nrows == 0:
        return ()
    if not m or not m[0]:
        return identity(nrows)
    _, u, rank = hnf_with_transform(m)
    return hnf(u[rank:])[0]


def rational_rank(m: Sequence[Sequence[int]]) -> int:
    return hnf(m)[1]


def det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(r) for r in m]
    if any(len(r) != n for r in a):
        raise StructuralError("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def snf_divisors(m: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero elementary divisors ``s1 | s2 | ... | sr`` of ``m``."""
    cur = [list(r) for r in m if any(r)]
    if not cur:
        return []
    # alternate row and column HNF until the matrix is diagonal
    while True:
        h, _ = hnf(cur)
        h, _ = hnf(transpose(h))
        cur = [list(r) for r in h]
        if all(x == 0 for i, r in enumerate(cur) for j, x in enumerate(r) if i != j):
            break
    diag = [abs(cur[i][i]) for i in range(min(len(cur), len(cur[0])))]
    diag = [d for d in diag if d]
    # restore the divisibility chain: (x, y) -> (gcd, lcm)
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            g = gcd(diag[i], diag[j])
            if g != diag[i]:
                diag[i], diag[j] = g, diag[i] * diag[j] // g
    return diag


def kernel_count_mod(m: Sequence[Sequence[int]], a: int, domain_rank: int | None = None) -> int:
    """``#{v in (Z/a)^c : m v = 0 mod a}`` for ``m`` acting on columns.

    Uses the Smith form: ``a**(c - r) * prod(gcd(a, s_i))``.
    """
    if a < 1:
        raise StructuralError("modulus must be positive")
    c = domain_rank if domain_rank is not None else ncols(as_matrix(m))
    divisors = snf_divisors(m)
    out = a ** (c - len(divisors))
    for s in divisors:
        out *= gcd(a, s)
    return out


@dataclass(frozen=True)
class LatticeBasis:
    """A full-row-rank integer basis inside ``Z^ambient_rank``."""

    ambient_rank: int
    basis: Matrix
    canonical: bool = False

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], ambient_rank: int) -> "LatticeBasis":
        h, _ = hnf(as_matrix(rows))
        if h and len(h[0]) != ambient_rank:
            raise StructuralError("row length does not match ambient rank")
        return cls(ambient_rank, h, True)

    @property
    def rank(self) -> int:
        return len(self.basis)


def saturate(b: LatticeBasis) -> LatticeBasis:
    """The lattice ``span_Q(b) ∩ Z^n`` in HNF."""
    n = b.ambient_rank
    if not b.basis:
        return LatticeBasis(n, (), True)
    normals = left_kernel(transpose(b.basis), n)
    if not normals:
        return LatticeBasis(n, identity(n), True)
    return LatticeBasis(n, left_kernel(transpose(normals), n), True)


def orth_complement(b: LatticeBasis, e: Matrix) -> LatticeBasis:
    """Saturated ``{x : x e y^T = 0 for all rows y of b}``."""
    n = b.ambient_rank
    if not b.basis:
        return LatticeBasis(n, identity(n), True)
    # x e y^T = 0  <=>  x (e y^T) = 0
    cols = matmul(e, transpose(b.basis))
    return LatticeBasis(n, left_kernel(cols, n), True)


def solve_rational(rows: Matrix, target: Sequence[int]) -> list[Fraction] | None:
    """Coefficients ``c`` with ``c * rows = target`` over Q, or None."""
    n = len(rows)
    width = len(target)
    # augmented system on the transpose: columns are the given rows
    aug = [[Fraction(rows[i][j]) for i in range(n)] + [Fraction(target[j])] for j in range(width)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, width) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(width):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    if any(aug[i][n] != 0 for i in range(r, width)):
        return None
    coeffs = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        coeffs[c] = aug[i][n]
    return coeffs


def index_in(sub: LatticeBasis, sup: LatticeBasis) -> int:
    """Index ``[sup : sub]`` for ``sub ⊆ sup`` of the same rank."""
    if sub.rank != sup.rank:
        raise StructuralError("index of lattices with different ranks")
    if sub.rank == 0:
        return 1
    transition = []
    for row in sub.basis:
        c = solve_rational(sup.basis, row)
        if c is None:
            raise StructuralError("rational spans differ")
        if any(x.denominator != 1 for x in c):
            raise StructuralError("sublattice is not contained in the superlattice")
        transition.append([int(x) for x in c])
    d = abs(det(transition))
    if d == 0:
        raise StructuralError("rank-deficient sublattice")
    return d


def pfaffian(m: Sequence[Sequence[int]]) -> int:
    """Exact Pfaffian of an integer skew-symmetric matrix.

    Skew Gaussian elimination over Q, pivoting on the (0, j) entry.
    """
    n = len(m)
    if any(len(r) != n for r in m):
        raise StructuralError("Pfaffian of a non-square matrix")
    if n % 2:
        raise StructuralError("Pfaffian of an odd-dimensional matrix")
    for i in range(n):
        for j in range(i, n):
            if m[i][j] != -m[j][i]:
                raise StructuralError("Pfaffian of a non-skew matrix")
    if n == 0:
        return 1
    if n == 2:
        return int(m[0][1])
    a = [[Fraction(x) for x in r] for r in m]
    result = Fraction(1)
    for k in range(0, n - 1, 2):
        p = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
        if p is None:
            return 0
        if p != k + 1:
            # simultaneous row/column swap flips the sign
            a[k + 1], a[p] = a[p], a[k + 1]
            for r in a:
                r[k + 1], r[p] = r[p], r[k + 1]
            result = -result
        piv = a[k][k + 1]
        result *= piv
        for i in range(k + 2, n):
            # eliminate entries (k, i) and (k+1, i) by congruence
            fi = a[k][i] / piv
            gi = a[k + 1][i] / piv
            if fi:
                for j in range(n):
                    a[i][j] -= fi * a[k + 1][j]
                for j in range(n):
                    a[j][i] -= fi * a[j][k + 1]
            if gi:
                for j in range(n):
                    a[i][j] += gi * a[k][j]
                for j in range(n):
                    a[j][i] += gi * a[j][k]
    if result.denominator != 1:
        raise ArithmeticError("non-integral Pfaffian of an integer matrix")
    return int(result)
