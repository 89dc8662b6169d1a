"""Invariant suites run by ``avsub verify`` and by the acceptance tests."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from math import prod

from .counting import (
    check_isogeny_inequalities,
    count_at,
    fit_slope,
    standard_isogeny_sublattice,
)
from .engine import Audit, Enumerator, HomSpace
from .linalg import LatticeBasis, hnf, matmul, saturate, transpose
from .torus import (
    FactorBlock,
    InvariantViolation,
    VarietyConfig,
    chi,
    complement,
    is_stable,
    sum_isogeny_degree,
)


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, ok: bool, detail: str = "") -> None:
        self.checks += 1
        if not ok and len(self.failures) < 20:
            self.failures.append(detail)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f" ({self.note})" if self.note else ""
        return f"{status} {self.name}: {self.checks} checks, {len(self.failures)} failures{extra}"


def check_complements(v: VarietyConfig, subs) -> SuiteResult:
    """Sum-isogeny identity, its degree bound and corollary, involution."""
    res = SuiteResult("complement identity / deg(s) <= chi^2 / chi(S') <= chi(L) chi(S)")
    chi_l = v.chi_total
    principal = all(d == 1 for d in v.degrees)
    e = v.riemann_form
    for s in subs:
        c = complement(v, s)
        deg = sum_isogeny_degree(s, c)
        res.check(deg * chi_l == s.chi * c.chi, f"{s.lattice}: {deg}*{chi_l} != {s.chi}*{c.chi}")
        res.check(deg <= s.chi ** 2, f"{s.lattice}: deg {deg} > chi^2 {s.chi ** 2}")
        res.check(c.chi <= chi_l * s.chi, f"{s.lattice}: chi(S') {c.chi} > {chi_l}*{s.chi}")
        res.check(s.dim + c.dim == v.g, f"{s.lattice}: ranks do not add up")
        res.check(is_stable(v, c.lattice), f"complement of {s.lattice} not stable")
        if s.lattice and c.lattice:
            cross = [x for r in _cross(e, s.lattice, c.lattice) for x in r]
            res.check(not any(cross), f"E does not vanish between {s.lattice} and its complement")
        res.check(complement(v, c).lattice == s.lattice, f"complement not an involution at {s.lattice}")
        if principal:
            res.check(s.chi == c.chi, f"principal case: chi(S)={s.chi} != chi(S')={c.chi}")
    return res


def _cross(e, a, b):
    return matmul(matmul(a, e), transpose(b))


def check_lattices(v: VarietyConfig, subs) -> SuiteResult:
    """Canonical form, saturation, stability, Pfaffian chi, product rule."""
    res = SuiteResult("lattice: HNF, saturated, stable, chi = |Pf|, Kunneth product")
    n = v.ambient_rank
    seen = set()
    for s in subs:
        res.check(s.lattice not in seen, f"duplicate {s.lattice}")
        seen.add(s.lattice)
        res.check(hnf(s.lattice)[0] == s.lattice, f"not in HNF: {s.lattice}")
        res.check(saturate(LatticeBasis(n, s.lattice)).basis == s.lattice, f"not saturated: {s.lattice}")
        res.check(is_stable(v, s.lattice), f"not stable: {s.lattice}")
        res.check(chi(v, s.lattice) == s.chi, f"stored chi {s.chi} != Pfaffian at {s.lattice}")
        if s.provenance.kind == "product":
            parts = s.provenance.data["components"]
            res.check(s.chi == prod(p.chi for p in parts), f"product chi mismatch at {s.lattice}")
    return res


def check_enumeration_audit(audit: Audit, pairs) -> SuiteResult:
    res = SuiteResult("graph chi formula = Pfaffian, sum facts")
    for name, count in sorted(audit.checks.items()):
        res.checks += count
    res.failures.extend(audit.failures[:20])
    for p in pairs:
        F, T, chi_s, deg_s, M = p["F"], p["T"], p["chi_S"], p["deg_s"], p["M"]
        res.check(deg_s * chi_s == F.chi * T.chi, f"a chi(S) != chi(F) chi(T) for {T.provenance.data}")
        res.check(deg_s * M <= T.chi, f"a M > chi(T) for {T.provenance.data}")
        res.check(T.chi <= chi_s * F.chi, f"chi(T) > chi(S) chi(F) for {T.provenance.data}")
    res.note = f"{len(pairs)} (F, T) pairs"
    return res


def _swap_rows(lattice, i, j):
    def perm(row):
        r = list(row)
        r[2 * i:2 * i + 2], r[2 * j:2 * j + 2] = row[2 * j:2 * j + 2], row[2 * i:2 * i + 2]
        return r

    return hnf([perm(r) for r in lattice])[0]


def check_permutations(v: VarietyConfig, subs, t: int) -> SuiteResult:
    res = SuiteResult("permutation invariance")
    lattices = {s.lattice for s in subs}
    degrees = v.degrees
    for i in range(v.g):
        for j in range(i + 1, v.g):
            same_block = _block_of(v, i) == _block_of(v, j)
            if same_block and degrees[i] == degrees[j]:
                image = {_swap_rows(L, i, j) for L in lattices}
                res.check(image == lattices, f"swap of copies {i},{j} does not preserve the set")
    # reversing every block (degrees travel with their copies) fixes N(t)
    rev = VarietyConfig(tuple(FactorBlock(b.name, b.ring, b.degrees[::-1]) for b in v.blocks))
    res.check(count_at(rev, t) == len(subs), "reversed copy order changes N(t)")
    return res


def _block_of(v: VarietyConfig, copy: int) -> int:
    for j, off in enumerate(v.offsets):
        if off <= copy < off + v.blocks[j].multiplicity:
            return j
    raise IndexError(copy)


def check_isogenies(v: VarietyConfig, t_max: int, enumerate_to: int | None = None) -> SuiteResult:
    res = SuiteResult("isogeny transfer inequalities (d = 4, 16)")
    notes = []
    for d in (4, 16):
        sub = standard_isogeny_sublattice(v, d)
        rep = check_isogeny_inequalities(v, sub, t_max, enumerate_to=enumerate_to)
        res.checks += 2 * t_max
        res.failures.extend(rep.violations[:10])
        exact = "exact" if rep.exact_up_to >= d * t_max else f"N_B exact to {rep.exact_up_to}"
        notes.append(f"d={d}: {exact}")
    res.note = f"t <= {t_max}; " + ", ".join(notes)
    return res


def check_slice_growth(v: VarietyConfig, t: int, enumerator: Enumerator | None = None) -> SuiteResult:
    """Empirical slope of slice counts against ``H + 1``."""
    res = SuiteResult("slice growth O(t^(H+1))")
    en = enumerator or Enumerator()
    notes = []
    for b in v.blocks:
        if b.multiplicity < 2:
            continue
        h_rank = HomSpace(b.ring, b.degrees[1:]).rank
        chis = sorted(s.chi for s in en.slice(b, t))
        ts = list(range(max(2, t // 2), t + 1))
        ns = [bisect_right(chis, s) for s in ts]
        if min(ns) < 2:
            continue
        slope = fit_slope(ts, ns)
        if slope is None:
            continue
        res.check(slope <= h_rank + 1 + 0.25, f"block {b.name}: slope {slope:.3f} > H+1.25")
        notes.append(f"{b.name}: slope {slope:.2f} vs H+1={h_rank + 1}")
    res.note = "; ".join(notes) or "no block with k >= 2"
    return res


def run_verify(v: VarietyConfig, t: int, iso_t: int | None = None, iso_enumerate_to: int | None = None,
               threads: int = 1) -> list[SuiteResult]:
    """Enumerate at ``t`` and run every invariant suite."""
    audit = Audit()
    en = Enumerator(threads=threads, audit=audit)
    results = []
    try:
        subs = en.variety(v, t)
    except InvariantViolation as exc:
        r = SuiteResult("enumeration")
        r.check(False, str(exc))
        return [r]
    results.append(check_enumeration_audit(audit, en.pairs))
    results.append(check_lattices(v, subs))
    results.append(check_complements(v, subs))
    results.append(check_permutations(v, subs, t))
    it = iso_t if iso_t is not None else min(50, t)
    cap = iso_enumerate_to if iso_enumerate_to is not None else max(t, 4 * it)
    results.append(check_isogenies(v, it, cap))
    results.append(check_slice_growth(v, t, en))
    return results

