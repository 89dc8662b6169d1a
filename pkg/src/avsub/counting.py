"""Counting functions, growth exponents and isogeny transfer."""

from __future__ import annotations

import math
import statistics
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .configfile import config_digest
from .engine import Enumerator, count_products
from .linalg import Matrix
from .torus import Subvariety, VarietyConfig, isogeny_pullback, sublattice_index

SLOPE_MARGIN = 0.25


@dataclass(frozen=True)
class CountTable:
    samples: tuple[tuple[int, int], ...]
    digest: str
    by_dim: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        ts = [t for t, _ in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample points must be strictly increasing")

    @property
    def ts(self) -> list[int]:
        return [t for t, _ in self.samples]

    @property
    def counts(self) -> list[int]:
        return [n for _, n in self.samples]

    def to_csv(self) -> str:
        dims = len(self.by_dim[0]) if self.by_dim else 0
        head = ["t", "N"] + [f"N_dim{d}" for d in range(dims)]
        lines = [",".join(head)]
        for i, (t, n) in enumerate(self.samples):
            row = [t, n] + (list(self.by_dim[i]) if self.by_dim else [])
            lines.append(",".join(map(str, row)))
        return "\n".join(lines) + "\n"


def _chi_prefix(chis: Sequence[int], t: int) -> int:
    return bisect_right(chis, t)


def counting_function(v: VarietyConfig, t_values: Sequence[int], enumerator: Enumerator | None = None,
                      exclude_trivial: bool = False) -> CountTable:
    """``N(t)`` on the given sample points from one enumeration at ``max(t)``."""
    ts = list(t_values)
    if not ts:
        return CountTable((), config_digest(v))
    if any(t < 1 for t in ts):
        raise ValueError("sample points must be positive")
    en = enumerator or Enumerator()
    lists = en.block_lists(v, max(ts))
    g = v.g
    if v.q == 1:
        subs = lists[0]
        chis = sorted(s.chi for s in subs)
        per_dim = defaultdict(list)
        for s in subs:
            per_dim[s.dim].append(s.chi)
        for lst in per_dim.values():
            lst.sort()
        samples, dims = [], []
        for t in ts:
            n = _chi_prefix(chis, t)
            row = [_chi_prefix(per_dim.get(d, []), t) for d in range(g + 1)]
            if exclude_trivial:
                n -= 1 + int(v.chi_total <= t)
                row[0] -= 1
                if v.chi_total <= t:
                    row[g] -= 1
            samples.append((t, n))
            dims.append(tuple(row))
        return CountTable(tuple(samples), config_digest(v), tuple(dims))
    # several blocks: count products, dimension by dimension
    per_block = []
    for lst in lists:
        d = defaultdict(list)
        for s in lst:
            d[s.dim].append(s.chi)
        per_block.append(d)
    samples, dims = [], []
    for t in ts:
        row = [0] * (g + 1)
        _count_by_dim(per_block, t, 0, 0, row)
        n = sum(row)
        if exclude_trivial:
            n -= 1 + int(v.chi_total <= t)
            row[0] -= 1
            if v.chi_total <= t:
                row[g] -= 1
        samples.append((t, n))
        dims.append(tuple(row))
    return CountTable(tuple(samples), config_digest(v), tuple(dims))


def _count_by_dim(per_block, t, j, dim, row):
    if j == len(per_block) - 1:
        for d, chis in per_block[j].items():
            row[dim + d] += sum(1 for c in chis if c <= t)
        return
    for d, chis in per_block[j].items():
        for c in chis:
            if c <= t:
                _count_by_dim(per_block, t // c, j + 1, dim + d, row)


def count_at(v: VarietyConfig, t: int, enumerator: Enumerator | None = None) -> int:
    en = enumerator or Enumerator()
    lists = en.block_lists(v, t)
    return count_products([[s.chi for s in lst] for lst in lists], t)


@dataclass(frozen=True)
class ExponentBounds:
    theorem: int
    per_block_sum: int
    q: int
    k: int
    h: int


def theorem_bound_exponent(v: VarietyConfig) -> ExponentBounds:
    """``q (k h + 2)(k - 1)`` and the sharper ``sum_j (k_j h_j + 2)(k_j - 1)``."""
    k = max(b.multiplicity for b in v.blocks)
    h = max(b.ring.rank for b in v.blocks)
    per_block = sum((b.multiplicity * b.ring.rank + 2) * (b.multiplicity - 1) for b in v.blocks)
    return ExponentBounds(v.q * (k * h + 2) * (k - 1), per_block, v.q, k, h)


@dataclass(frozen=True)
class BoundReport:
    status: str  # "pass", "fail" or "inconclusive"
    exponent_bound: int
    per_block_bound: int
    fitted_slope: float | None
    margin: float
    samples_used: int
    t_range: tuple[int, int] | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "pass": self.passed,
            "exponent_bound": self.exponent_bound,
            "per_block_sum_bound": self.per_block_bound,
            "fitted_slope": None if self.fitted_slope is None else round(self.fitted_slope, 6),
            "margin": self.margin,
            "samples_used": self.samples_used,
            "t_range": list(self.t_range) if self.t_range else None,
            "note": self.note,
        }


def fit_slope(ts: Sequence[int], ns: Sequence[int]) -> float | None:
    """Least-squares slope of ``log N`` against ``log t``; None if degenerate."""
    xs = [math.log(t) for t in ts]
    ys = [math.log(n) for n in ns]
    if len(set(xs)) < 2:
        return None
    return statistics.linear_regression(xs, ys).slope


def fit_exponent(table: CountTable, bounds: ExponentBounds, margin: float = SLOPE_MARGIN) -> BoundReport:
    samples = list(table.samples)
    upper = samples[len(samples) // 2:]
    usable = [(t, n) for t, n in upper if n >= 2]
    if len(samples) < 5 or len(usable) < 5 or len(usable) < len(upper):
        return BoundReport("inconclusive", bounds.theorem, bounds.per_block_sum, None, margin, len(usable),
                           note="need >= 5 samples with N >= 2 in the upper half of the t-range")
    slope = fit_slope([t for t, _ in usable], [n for _, n in usable])
    if slope is None:
        return BoundReport("inconclusive", bounds.theorem, bounds.per_block_sum, None, margin, len(usable),
                           note="degenerate t-range")
    status = "pass" if slope <= bounds.theorem + margin else "fail"
    return BoundReport(status, bounds.theorem, bounds.per_block_sum, slope, margin, len(usable),
                       (usable[0][0], usable[-1][0]))


@dataclass
class IsogenyReport:
    index: int
    t_max: int
    n_a: list[int] = field(default_factory=list)
    n_b: list[int] = field(default_factory=list)
    exact_up_to: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def transferred_chis(v: VarietyConfig, sub: Matrix, subs: Sequence[Subvariety]) -> list[tuple[int, int, int]]:
    """``(chi, d_S, chi*)`` for every subvariety under the isogeny with lattice ``sub``."""
    d = sublattice_index(sub)
    out = []
    for s in subs:
        _, d_s, chi_star = isogeny_pullback(v, sub, s)
        if d % d_s or chi_star != d_s * s.chi:
            raise ArithmeticError(f"transfer inconsistent: d={d}, d_S={d_s}, chi={s.chi}, chi*={chi_star}")
        out.append((s.chi, d_s, chi_star))
    return out


def check_isogeny_inequalities(v: VarietyConfig, sub: Matrix, t_max: int,
                               enumerator: Enumerator | None = None,
                               enumerate_to: int | None = None) -> IsogenyReport:
    """``N_A(t) <= N_B(d t)`` and ``N_B(t) <= N_A(t)`` for ``t <= t_max``.

    ``N_B(s)`` is exact for ``s <= enumerate_to`` (default ``d * t_max``,
    which makes every value exact). Above it the enumerated subvarieties
    only give a lower bound for ``N_B(s)``, which still certifies the
    first inequality whenever it holds.
    """
    d = sublattice_index(sub)
    en = enumerator or Enumerator()
    limit = d * t_max if enumerate_to is None else max(t_max, min(enumerate_to, d * t_max))
    subs = en.variety(v, limit)
    trans = transferred_chis(v, sub, subs)
    chi_a = sorted(c for c, _, _ in trans)
    chi_b = sorted(c for _, _, c in trans)
    rep = IsogenyReport(d, t_max, exact_up_to=limit)
    for t in range(1, t_max + 1):
        na = bisect_right(chi_a, t)
        nb = bisect_right(chi_b, t)
        nb_dt = bisect_right(chi_b, d * t)
        rep.n_a.append(na)
        rep.n_b.append(nb)
        if na > nb_dt:
            rep.violations.append(f"t={t}: N_A(t)={na} > N_B(dt)={nb_dt}")
        if nb > na:
            rep.violations.append(f"t={t}: N_B(t)={nb} > N_A(t)={na}")
    for (c, d_s, _) in trans:
        if not (c <= d_s * c <= d * c):
            rep.violations.append(f"chi chain broken for chi={c}, d_S={d_s}")
    return rep


def standard_isogeny_sublattice(v: VarietyConfig, index: int) -> Matrix:
    """Diagonal sublattice of the requested index (4 or 16) used by ``verify``.

    Index 4 multiplies the first copy by 2; index 16 doubles the first two
    copies, or multiplies the only copy by 4.
    """
    n = v.ambient_rank
    diag = [1] * n
    if index == 4:
        diag[0] = diag[1] = 2
    elif index == 16:
        if v.g >= 2:
            diag[:4] = [2, 2, 2, 2]
        else:
            diag[0] = diag[1] = 4
    else:
        raise ValueError("index must be 4 or 16")
    return tuple(tuple(diag[i] if i == j else 0 for j in range(n)) for i in range(n))
