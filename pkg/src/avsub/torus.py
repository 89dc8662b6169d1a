"""Lattice model of a polarized product of elliptic curves.

Copy ``i`` of the product owns coordinates ``2i, 2i+1`` of ``Z^{2g}``,
with basis ``{1, omega}`` of the period lattice (``{1, tau}`` for curves
without complex multiplication). The polarization is the alternating
form ``E`` with block ``d_i * [[0, 1], [-1, 0]]`` on copy ``i``. An
abelian subvariety is a saturated sublattice whose rational span is
stable under the complex structure, encoded by the stability operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Any, Sequence

from .linalg import (
    LatticeBasis,
    Matrix,
    StructuralError,
    det,
    hnf,
    identity,
    index_in,
    left_kernel,
    matmul,
    orth_complement,
    pfaffian,
    rational_rank,
    saturate,
    transpose,
)


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates an engine bug."""


@dataclass(frozen=True)
class EndRing:
    """``Z`` or the imaginary quadratic order ``Z[w]``, ``w^2 = s w - p``."""

    kind: str = "Z"
    s: int = 0
    p: int = 0

    def __post_init__(self):
        if self.kind == "Z":
            if self.s or self.p:
                raise StructuralError("ring Z takes no parameters")
        elif self.kind == "order":
            if self.p < 1:
                raise StructuralError("order parameter p must be positive")
            if self.s * self.s - 4 * self.p >= 0:
                raise StructuralError("order discriminant s^2 - 4p must be negative")
        else:
            raise StructuralError(f"unknown ring kind {self.kind!r}")

    @classmethod
    def integers(cls) -> "EndRing":
        return cls("Z")

    @classmethod
    def order(cls, s: int, p: int) -> "EndRing":
        return cls("order", s, p)

    @property
    def rank(self) -> int:
        return 1 if self.kind == "Z" else 2

    @property
    def discriminant(self) -> int | None:
        return self.s * self.s - 4 * self.p if self.kind == "order" else None

    @property
    def omega_matrix(self) -> Matrix:
        return ((0, -self.p), (1, self.s))

    def action_matrix(self, coeffs: Sequence[int]) -> Matrix:
        """Matrix of ``x + y w`` (or of ``m`` in ``Z``) on columns in basis {1, w}."""
        if self.kind == "Z":
            (m,) = coeffs
            return ((m, 0), (0, m))
        x, y = coeffs
        return ((x, -self.p * y), (y, x + self.s * y))

    def norm(self, coeffs: Sequence[int]) -> int:
        if self.kind == "Z":
            (m,) = coeffs
            return m * m
        x, y = coeffs
        return x * x + self.s * x * y + self.p * y * y

    @property
    def basis_actions(self) -> tuple[Matrix, ...]:
        """Action matrices of the additive basis of the ring."""
        if self.kind == "Z":
            return (identity(2),)
        return (identity(2), self.omega_matrix)

    @property
    def norm_gram2(self) -> Matrix:
        """Twice the Gram matrix of the norm form."""
        if self.kind == "Z":
            return ((2,),)
        return ((2, self.s), (self.s, 2 * self.p))

    @property
    def stability_blocks(self) -> tuple[Matrix, ...]:
        if self.kind == "Z":
            return (((1, 0), (0, 0)), ((0, 1), (0, 0)), ((0, 0), (1, 0)))
        return (self.omega_matrix,)

    def to_json(self) -> dict[str, Any]:
        if self.kind == "Z":
            return {"kind": "Z"}
        return {"kind": "order", "s": self.s, "p": self.p}


@dataclass(frozen=True)
class FactorBlock:
    name: str
    ring: EndRing
    degrees: tuple[int, ...]

    def __post_init__(self):
        if not self.degrees:
            raise StructuralError("a block needs at least one copy")
        if any(d < 1 for d in self.degrees):
            raise StructuralError("polarization degrees must be >= 1")

    @property
    def multiplicity(self) -> int:
        return len(self.degrees)

    def tail(self) -> "FactorBlock":
        return FactorBlock(self.name, self.ring, self.degrees[1:])

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "ring": self.ring.to_json(),
            "multiplicity": self.multiplicity,
            "degrees": list(self.degrees),
        }


def _symplectic(d: int) -> Matrix:
    return ((0, d), (-d, 0))


def _block_diag(blocks: Sequence[Matrix], size: int = 2) -> Matrix:
    n = size * len(blocks)
    rows = [[0] * n for _ in range(n)]
    for b, blk in enumerate(blocks):
        for i in range(size):
            for j in range(size):
                rows[b * size + i][b * size + j] = blk[i][j]
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class VarietyConfig:
    blocks: tuple[FactorBlock, ...]

    def __post_init__(self):
        if not self.blocks:
            raise StructuralError("a variety needs at least one block")
        rings = [b.ring for b in self.blocks]
        if len(set(rings)) != len(rings):
            raise StructuralError("two blocks share the same endomorphism ring")

    @classmethod
    def single(cls, block: FactorBlock) -> "VarietyConfig":
        return cls((block,))

    @property
    def q(self) -> int:
        return len(self.blocks)

    @property
    def g(self) -> int:
        return sum(b.multiplicity for b in self.blocks)

    @property
    def ambient_rank(self) -> int:
        return 2 * self.g

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for b in self.blocks for d in b.degrees)

    @property
    def offsets(self) -> tuple[int, ...]:
        """First copy index of every block."""
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b.multiplicity
        return tuple(out)

    @cached_property
    def riemann_form(self) -> Matrix:
        return _block_diag([_symplectic(d) for d in self.degrees])

    @property
    def chi_total(self) -> int:
        return prod(self.degrees)

    @cached_property
    def stability_operators(self) -> tuple[Matrix, ...]:
        """Operators on column vectors of ``Z^{2g}`` fixing subtori."""
        ops = []
        n = self.ambient_rank
        for block, off in zip(self.blocks, self.offsets):
            for w in block.ring.stability_blocks:
                blocks = [((0, 0), (0, 0))] * self.g
                for c in range(off, off + block.multiplicity):
                    blocks[c] = w
                ops.append(_block_diag(blocks))
        assert all(len(o) == n for o in ops)
        return tuple(ops)

    def to_json(self) -> dict[str, Any]:
        return {"blocks": [b.to_json() for b in self.blocks]}


@dataclass(frozen=True)
class Provenance:
    kind: str
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Subvariety:
    lattice: Matrix
    ambient_rank: int
    chi: int
    provenance: Provenance = field(default=Provenance("unknown"), compare=False)

    @property
    def dim(self) -> int:
        return len(self.lattice) // 2

    @property
    def basis(self) -> LatticeBasis:
        return LatticeBasis(self.ambient_rank, self.lattice, True)

    def sort_key(self):
        return (self.dim, self.chi, self.lattice)


def restricted_form(e: Matrix, rows: Matrix) -> Matrix:
    """Gram matrix ``(b_i E b_j^T)`` over the given rows."""
    if not rows:
        return ()
    return matmul(matmul(rows, e), transpose(rows))


def chi_of_lattice(e: Matrix, rows: Matrix) -> int:
    """``|Pf|`` of ``E`` restricted to the lattice spanned by ``rows``."""
    if len(rows) % 2:
        raise StructuralError("odd-rank lattice cannot carry a polarization")
    if not rows:
        return 1
    value = abs(pfaffian(restricted_form(e, rows)))
    if value == 0:
        raise StructuralError("polarization degenerates on the lattice")
    return value


def chi(v: VarietyConfig, rows: Matrix) -> int:
    return chi_of_lattice(v.riemann_form, rows)


def is_stable(v: VarietyConfig, rows: Matrix) -> bool:
    if not rows:
        return True
    r = len(rows)
    for op in v.stability_operators:
        # row vector x maps to (op x^T)^T = x op^T
        image = matmul(rows, transpose(op))
        if rational_rank(list(rows) + list(image)) != r:
            return False
    return True


def _canonical(rows, n: int) -> Matrix:
    return saturate(LatticeBasis(n, hnf(rows)[0])).basis


def make_subvariety(v: VarietyConfig, rows, provenance: Provenance | None = None,
                    check: bool = True) -> Subvariety:
    n = v.ambient_rank
    lat = _canonical(rows, n)
    if check and not is_stable(v, lat):
        raise StructuralError("lattice span is not stable under the complex structure")
    return Subvariety(lat, n, chi(v, lat), provenance or Provenance("explicit"))


def zero(v: VarietyConfig) -> Subvariety:
    return Subvariety((), v.ambient_rank, 1, Provenance("trivial", {"which": "zero"}))


def full(v: VarietyConfig) -> Subvariety:
    n = v.ambient_rank
    return Subvariety(identity(n), n, v.chi_total, Provenance("trivial", {"which": "full"}))


def complement(v: VarietyConfig, s: Subvariety) -> Subvariety:
    """The E-orthogonal complementary subvariety."""
    lat = orth_complement(s.basis, v.riemann_form).basis
    return Subvariety(lat, v.ambient_rank, chi(v, lat), Provenance("complement", {"of": s.lattice}))


def sum_isogeny_degree(s: Subvariety, s2: Subvariety) -> int:
    """Degree of ``S x S' -> S + S'``, i.e. ``[sat(L_S + L_S') : L_S + L_S']``."""
    n = s.ambient_rank
    stacked = list(s.lattice) + list(s2.lattice)
    if not stacked:
        return 1
    h, rank = hnf(stacked)
    if rank != len(stacked):
        raise StructuralError("subvarieties intersect in positive dimension")
    if rank == n:
        return abs(det(stacked))
    sat = saturate(LatticeBasis(n, h))
    return index_in(LatticeBasis(n, h), sat)


def lattice_intersection(rows_a: Matrix, rows_b: Matrix, n: int) -> Matrix:
    if not rows_a or not rows_b:
        return ()
    stacked = tuple(rows_a) + tuple(tuple(-x for x in r) for r in rows_b)
    ker = left_kernel(stacked, len(stacked))
    k = len(rows_a)
    vecs = [[sum(u[i] * rows_a[i][j] for i in range(k)) for j in range(n)] for u in ker]
    return hnf(vecs)[0]


def isogeny_pullback(v: VarietyConfig, sub: Matrix, s: Subvariety) -> tuple[Matrix, int, int]:
    """Transfer ``S`` along the isogeny ``V/M -> V/Z^{2g}``.

    Returns ``(lattice of S*, d_S, chi*)`` where the lattice is
    ``L_S ∩ M``, ``d_S = [L_S : L_S ∩ M]`` and ``chi*`` is computed with
    the pulled-back form.
    """
    n = v.ambient_rank
    h, rank = hnf(sub)
    if rank != n:
        raise StructuralError("isogeny sublattice must have finite index")
    if not s.lattice:
        return (), 1, 1
    inter = lattice_intersection(s.lattice, h, n)
    d_s = index_in(LatticeBasis(n, inter), s.basis)
    return inter, d_s, chi(v, inter)


def sublattice_index(sub: Matrix) -> int:
    h, rank = hnf(sub)
    if not h or rank != len(h[0]):
        raise StructuralError("isogeny sublattice must have finite index")
    return abs(det(h))
