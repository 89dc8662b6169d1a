"""Enumeration of abelian subvarieties of bounded Euler characteristic.

For a block ``B^k`` the first copy plays the role of the simple factor:
every subvariety either lies in ``0 x B^{k-1}`` or is ``F + T`` with
``F`` the connected kernel of the first projection and ``T`` a graph
``C_{a,f}`` complementary to ``F``. Graphs are the images of
``x -> (a x, f(x))`` with ``f`` in ``Hom(B, B^{k-1}) = End(B)^{k-1}``;
their parameters are found by scanning the degree form's ellipsoid.
"""

from __future__ import annotations

import bisect
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

from . import kernels
from .linalg import LatticeBasis, Matrix, det, hnf, index_in, left_kernel, matmul, saturate, transpose
from .quadform import GramForm
from .torus import (
    EndRing,
    FactorBlock,
    InvariantViolation,
    Provenance,
    Subvariety,
    VarietyConfig,
    chi_of_lattice,
    restricted_form,
)


@dataclass
class Audit:
    """Tally of invariant checks made during a run."""

    checks: Counter = field(default_factory=Counter)
    failures: list = field(default_factory=list)

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks[name] += 1
        if not ok:
            self.failures.append(f"{name}: {detail}")
        return ok

    @property
    def ok(self) -> bool:
        return not self.failures


class HomSpace:
    """``Hom(B, B^m)`` in coordinates: ``rank(ring)`` integers per target copy."""

    def __init__(self, ring: EndRing, target_degrees: Sequence[int]):
        self.ring = ring
        self.target_degrees = tuple(target_degrees)
        self.h = ring.rank
        self.rank = self.h * len(self.target_degrees)

    @cached_property
    def form(self) -> GramForm:
        n = self.rank
        g = [[0] * n for _ in range(n)]
        for i, d in enumerate(self.target_degrees):
            for r, row in enumerate(self.ring.norm_gram2):
                for c, x in enumerate(row):
                    g[i * self.h + r][i * self.h + c] = d * x
        return GramForm(tuple(tuple(r) for r in g))

    @cached_property
    def mats(self) -> tuple[tuple[int, ...], ...]:
        """Flattened ``2m x 2`` stacked action matrix of each coordinate."""
        m = len(self.target_degrees)
        out = []
        for i in range(m):
            for act in self.ring.basis_actions:
                flat = [0] * (4 * m)
                for r in range(2):
                    for c in range(2):
                        flat[2 * (2 * i + r) + c] = act[r][c]
                out.append(tuple(flat))
        return tuple(out)

    def stacked(self, v: Sequence[int]) -> list[int]:
        width = 4 * len(self.target_degrees)
        out = [0] * width
        for vl, ml in zip(v, self.mats):
            if vl:
                for r in range(width):
                    out[r] += vl * ml[r]
        return out

    def elements(self, v: Sequence[int]) -> list[tuple[int, ...]]:
        h = self.h
        return [tuple(v[i * h:(i + 1) * h]) for i in range(len(self.target_degrees))]


def degree_form(ring: EndRing, target_degrees: Sequence[int]) -> GramForm:
    """Degree form ``f -> sum_i d_i deg(f_i)`` on ``Hom(B, B^m)``."""
    if not target_degrees:
        raise ValueError("degree form needs at least one target copy")
    return HomSpace(ring, target_degrees).form


@dataclass(frozen=True)
class GraphParams:
    a: int
    f: tuple[int, ...]

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("a must be positive")


@dataclass(frozen=True)
class SliceBounds:
    M: int
    t: int

    @property
    def a_max(self) -> int:
        return max(self.t // self.M, 0)

    def form_bound(self, a: int) -> int:
        return a * (self.t - a * self.M)


class RejectedParameters(ValueError):
    pass


def graph_degree_condition(ring: EndRing, p: GraphParams) -> bool:
    """``deg(a, f) = a``: exactly ``a`` points of ``B[a]`` die under ``f``."""
    from .linalg import kernel_count_mod

    m = len(p.f) // ring.rank
    flat = HomSpace(ring, [1] * m).stacked(p.f)
    rows = [flat[2 * r:2 * r + 2] for r in range(2 * m)]
    return kernel_count_mod(rows, p.a, domain_rank=2) == p.a


def graph_rows(a: int, stacked: Sequence[int]) -> Matrix:
    """Generators of the image of ``(a, f)`` on the period lattice of B."""
    m2 = len(stacked) // 2
    rows = []
    for j in range(2):
        head = (a, 0) if j == 0 else (0, a)
        rows.append(head + tuple(stacked[2 * r + j] for r in range(m2)))
    return tuple(rows)


def chi_graph_formula(M: int, p: GraphParams, q: GramForm) -> int:
    """Exact ``chi(C_{a,f}) = a M + Q(f) / a``."""
    num = p.a * p.a * M + q(p.f)
    if num % p.a:
        raise InvariantViolation(f"non-integral chi for graph {p}")
    return num // p.a


def build_graph_subvariety(block: FactorBlock, p: GraphParams, check: bool = True) -> Subvariety:
    hom = HomSpace(block.ring, block.degrees[1:])
    if check and not graph_degree_condition(block.ring, p):
        raise RejectedParameters(f"degree condition fails for {p}")
    rows = graph_rows(p.a, hom.stacked(p.f))
    n = 2 * block.multiplicity
    lat = saturate(LatticeBasis(n, hnf(rows)[0])).basis
    e = VarietyConfig.single(block).riemann_form
    return Subvariety(lat, n, chi_of_lattice(e, lat),
                      Provenance("graph", {"a": p.a, "f": tuple(p.f)}))


def projection_degree(lattice: Matrix) -> int:
    """Degree of the projection of a rank-2 lattice to the first copy."""
    return abs(det([r[:2] for r in lattice]))


def _embed(s: Subvariety, left: int, right: int) -> Subvariety:
    """Pad a subvariety with ``left`` and ``right`` zero copies."""
    z_l, z_r = (0,) * (2 * left), (0,) * (2 * right)
    lat = tuple(z_l + r + z_r for r in s.lattice)
    n = s.ambient_rank + 2 * (left + right)
    return Subvariety(lat, n, s.chi, Provenance("embed", {"source": s, "offset": left}))


class Enumerator:
    """Runs the recursion; one instance caches results per block and bound.

    ``method="pruned"`` scans only maps ``f`` landing in the complement of
    ``F``; ``method="literal"`` scans the whole slice at ``t^2 / M`` and
    filters complementary pairs afterwards (slower, used as a cross-check).
    """

    def __init__(self, threads: int = 1, method: str = "pruned", audit: Audit | None = None,
                 backend: str | None = None):
        if method not in ("pruned", "literal"):
            raise ValueError(f"unknown method {method!r}")
        self.threads = max(1, int(threads))
        self.method = method
        self.audit = audit if audit is not None else Audit()
        self.backend = backend
        self.pairs: list[dict] = []
        self._blocks: dict = {}
        self._slices: dict = {}

    # graphs ---------------------------------------------------------------

    def _scan(self, hom: HomSpace, sub: Matrix | None, jobs: list[tuple[int, int]]):
        """Points ``(a, v)`` passing the degree condition, ``v`` in full coordinates."""
        if sub is None:
            form, mats = hom.form, hom.mats
        else:
            form = hom.form.restrict(sub) if sub else GramForm(())
            mats = tuple(
                tuple(sum(b[l] * hom.mats[l][r] for l in range(hom.rank)) for r in range(len(hom.mats[0])))
                for b in sub
            ) if sub else ()
        levels, dets = form.levels

        def run(job):
            a, cap = job
            pts = kernels.scan(levels, dets, 2 * cap, mats, a, backend=self.backend)
            if sub is not None:
                pts = [tuple(sum(x * b[l] for x, b in zip(p, sub)) for l in range(hom.rank)) for p in pts]
            return a, pts

        jobs = [j for j in jobs if j[1] >= 0]
        if self.threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                return list(ex.map(run, jobs))
        return [run(j) for j in jobs]

    def _graph(self, block: FactorBlock, hom: HomSpace, e: Matrix, a: int, v: tuple[int, ...]) -> Subvariety:
        q = hom.form
        M = block.degrees[0]
        params = GraphParams(a, v)
        chi_f = chi_graph_formula(M, params, q)
        n = 2 * block.multiplicity
        lat = saturate(LatticeBasis(n, hnf(graph_rows(a, hom.stacked(v)))[0])).basis
        chi_p = chi_of_lattice(e, lat)
        self.audit.check("graph chi formula = Pfaffian", chi_f == chi_p, f"{params}: {chi_f} != {chi_p}")
        if chi_f != chi_p:
            raise InvariantViolation(f"chi formula {chi_f} != Pfaffian {chi_p} for {params}")
        self.audit.check("graph projection degree = a", projection_degree(lat) == a, str(params))
        return Subvariety(lat, n, chi_f, Provenance("graph", {"a": a, "f": v}))

    def slice(self, block: FactorBlock, t: int) -> list[Subvariety]:
        """All ``C_{a,f}`` in ``B x B^{k-1}`` with ``chi <= t``."""
        key = (block.ring, block.degrees, t)
        if key in self._slices:
            return self._slices[key]
        hom = HomSpace(block.ring, block.degrees[1:])
        e = VarietyConfig.single(block).riemann_form
        b = SliceBounds(block.degrees[0], t)
        jobs = [(a, b.form_bound(a)) for a in range(1, b.a_max + 1)]
        out = []
        for a, pts in self._scan(hom, None, jobs):
            out.extend(self._graph(block, hom, e, a, v) for v in pts)
        out = _dedup(out, "slice")
        self._slices[key] = out
        return out

    def _complement_hom(self, block: FactorBlock, hom: HomSpace, F: Subvariety) -> Matrix:
        """Basis of the maps ``f`` with image E-orthogonal to ``F``."""
        e_tail = VarietyConfig.single(block.tail()).riemann_form
        cond = []
        for ml in hom.mats:
            row = []
            for j in range(2):
                col = [ml[2 * r + j] for r in range(len(ml) // 2)]
                ce = [sum(col[k] * e_tail[k][c] for k in range(len(col))) for c in range(len(col))]
                row.extend(sum(x * y for x, y in zip(ce, yrow)) for yrow in F.lattice)
            cond.append(tuple(row))
        return left_kernel(tuple(cond), hom.rank)

    def block(self, block: FactorBlock, t: int) -> list[Subvariety]:
        """All subvarieties of the block ``B^k`` with ``chi <= t``."""
        key = (block.ring, block.degrees, t)
        if key in self._blocks:
            return self._blocks[key]
        n = 2 * block.multiplicity
        if block.multiplicity == 1:
            out = [Subvariety((), 2, 1, Provenance("trivial", {"which": "zero"}))]
            if block.degrees[0] <= t:
                out.append(Subvariety(((1, 0), (0, 1)), 2, block.degrees[0],
                                      Provenance("trivial", {"which": "full"})))
            self._blocks[key] = out
            return out
        M = block.degrees[0]
        e = VarietyConfig.single(block).riemann_form
        hom = HomSpace(block.ring, block.degrees[1:])
        rest = self.block(block.tail(), t)
        out = [_embed(s, 1, 0) for s in rest]
        for F in rest:
            if F.chi * M > t:
                continue
            if F.dim == 0:
                out.extend(self.slice(block, t))
                continue
            F_emb = _embed(F, 1, 0)
            for T in self._complementary_graphs(block, hom, e, F, t):
                S = self._sum(block, e, F_emb, T, t)
                if S is not None:
                    out.append(S)
        out = _dedup(out, f"block {block.name}^{block.multiplicity}")
        self._blocks[key] = out
        return out

    def _complementary_graphs(self, block, hom, e, F, t) -> Iterable[Subvariety]:
        M = block.degrees[0]
        if self.method == "literal":
            F_rows = _embed(F, 1, 0).lattice
            for T in self.slice(block, (t * t) // M):
                if all(x == 0 for r in restricted_cross(e, T.lattice, F_rows) for x in r):
                    yield T
            return
        sub = self._complement_hom(block, hom, F)
        cf = F.chi
        jobs = []
        for a in range(1, (t * cf) // M + 1):
            cap = min(a * (t * cf - a * M), (a * a * (t - cf * M)) // cf)
            jobs.append((a, cap))
        for a, pts in self._scan(hom, sub, jobs):
            for v in pts:
                yield self._graph(block, hom, e, a, v)

    def _sum(self, block, e, F: Subvariety, T: Subvariety, t: int) -> Subvariety | None:
        n = 2 * block.multiplicity
        stacked = list(F.lattice) + list(T.lattice)
        h, rank = hnf(stacked)
        if rank != len(stacked):
            return None  # T meets F in positive dimension; impossible for graphs
        cross = restricted_cross(e, F.lattice, T.lattice)
        if any(x for r in cross for x in r):
            return None
        sat = saturate(LatticeBasis(n, h))
        deg_s = index_in(LatticeBasis(n, h), sat)
        num = F.chi * T.chi
        if num % deg_s:
            raise InvariantViolation(f"deg(s) = {deg_s} does not divide chi(F) chi(T) = {num}")
        chi_s = num // deg_s
        if chi_s > t:
            return None
        chi_p = chi_of_lattice(e, sat.basis)
        if chi_p != chi_s:
            raise InvariantViolation(f"chi(F+T) = {chi_s} disagrees with Pfaffian {chi_p}")
        a_proj = T.provenance.data["a"]
        M = block.degrees[0]
        au = self.audit
        au.check("sum: deg(s) chi(S) = chi(F) chi(T)", deg_s * chi_s == F.chi * T.chi)
        au.check("sum: deg(s) M <= chi(T)", deg_s * M <= T.chi, f"{deg_s}*{M} > {T.chi}")
        au.check("sum: chi(T) <= chi(S) chi(F)", T.chi <= chi_s * F.chi)
        au.check("sum: deg(s) <= deg(p_T)", deg_s <= a_proj)
        au.check("sum: a M <= chi(T)", a_proj * M <= T.chi)
        self.pairs.append({"F": F, "T": T, "chi_S": chi_s, "deg_s": deg_s, "a": a_proj, "M": M})
        return Subvariety(sat.basis, n, chi_s, Provenance("sum", {"F": F, "T": T, "deg_s": deg_s}))

    # whole variety -------------------------------------------------------

    def block_lists(self, v: VarietyConfig, t: int) -> list[list[Subvariety]]:
        return [self.block(b, t) for b in v.blocks]

    def variety(self, v: VarietyConfig, t: int) -> list[Subvariety]:
        return assemble_products(v, self.block_lists(v, t), t)


def restricted_cross(e: Matrix, rows_a: Matrix, rows_b: Matrix) -> Matrix:
    if not rows_a or not rows_b:
        return ()
    return matmul(matmul(rows_a, e), transpose(rows_b))


def _dedup(items: list[Subvariety], where: str) -> list[Subvariety]:
    seen: dict = {}
    for s in items:
        prev = seen.get(s.lattice)
        if prev is not None:
            raise InvariantViolation(
                f"duplicate lattice in {where}: {s.lattice} from {prev.provenance.kind} "
                f"{_short(prev.provenance)} and {s.provenance.kind} {_short(s.provenance)}"
            )
        seen[s.lattice] = s
    return sorted(seen.values(), key=Subvariety.sort_key)


def _short(p: Provenance) -> str:
    return str({k: v for k, v in p.data.items() if not isinstance(v, Subvariety)})


def enumerate_slice(block: FactorBlock, t: int, **kw) -> list[Subvariety]:
    return Enumerator(**kw).slice(block, t)


def enumerate_block(block: FactorBlock, t: int, **kw) -> list[Subvariety]:
    return Enumerator(**kw).block(block, t)


def assemble_products(v: VarietyConfig, lists: Sequence[Sequence[Subvariety]], t: int) -> list[Subvariety]:
    """Block-wise products with ``prod chi <= t``, in canonical order."""
    g = v.g
    offsets = v.offsets
    mults = [b.multiplicity for b in v.blocks]
    if len(lists) == 1:
        return sorted((s for s in lists[0] if s.chi <= t), key=Subvariety.sort_key)
    by_chi = [sorted(lst, key=lambda s: s.chi) for lst in lists]
    out = []

    def rec(j, bound, parts):
        if j == len(by_chi):
            rows = []
            for s, off, k in zip(parts, offsets, mults):
                rows.extend(_embed(s, off, g - off - k).lattice)
            lat = hnf(rows)[0]
            out.append(Subvariety(lat, 2 * g, prod(s.chi for s in parts),
                                  Provenance("product", {"components": tuple(parts)})))
            return
        for s in by_chi[j]:
            if s.chi > bound:
                break
            rec(j + 1, bound // s.chi, parts + [s])

    rec(0, t, [])
    return _dedup(out, "product")


def count_products(chi_lists: Sequence[Sequence[int]], t: int) -> int:
    """``#{(s_1..s_q) : prod chi(s_j) <= t}`` without materializing tuples."""
    lists = [sorted(c) for c in chi_lists]
    memo: dict = {}

    def rec(j, bound):
        if j == len(lists) - 1:
            return bisect.bisect_right(lists[j], bound)
        key = (j, bound)
        if key not in memo:
            total = 0
            for c in lists[j]:
                if c > bound:
                    break
                total += rec(j + 1, bound // c)
            memo[key] = total
        return memo[key]

    return rec(0, t) if lists else 0
