import math

import pytest

from avsub.counting import (
    CountTable,
    ExponentBounds,
    check_isogeny_inequalities,
    counting_function,
    fit_exponent,
    fit_slope,
    standard_isogeny_sublattice,
    theorem_bound_exponent,
    transferred_chis,
)
from avsub.engine import Enumerator
from avsub.linalg import identity
from avsub.torus import EndRing, FactorBlock, VarietyConfig

from conftest import oracle_non_cm

Z = EndRing.integers()
GAUSS = EndRing.order(0, 1)


def test_theorem_bound_examples(non_cm, gaussian, two_block):
    single = VarietyConfig.single(FactorBlock("E", Z, (1,)))
    assert theorem_bound_exponent(single).theorem == 0
    assert theorem_bound_exponent(non_cm).theorem == 4
    assert theorem_bound_exponent(gaussian).theorem == 6
    v = VarietyConfig((FactorBlock("A", GAUSS, (1, 1)), FactorBlock("B", Z, (1,))))
    b = theorem_bound_exponent(v)
    assert (b.theorem, b.per_block_sum) == (12, 6)
    b = theorem_bound_exponent(two_block)
    assert (b.q, b.k, b.h, b.theorem, b.per_block_sum) == (2, 2, 2, 12, 4)


def test_counting_function_matches_oracle(non_cm):
    table = counting_function(non_cm, range(1, 101))
    oracle = oracle_non_cm(100)
    assert table.counts == [oracle[t] for t in table.ts]
    # dimension split: 0, two copies of E, A
    for (t, n), dims in zip(table.samples, table.by_dim):
        assert sum(dims) == n and dims[0] == 1 and dims[2] == 1


def test_exclude_trivial(non_cm, two_block):
    for v in (non_cm, two_block):
        a = counting_function(v, [1, 5, 20])
        b = counting_function(v, [1, 5, 20], exclude_trivial=True)
        for (t, na), (_, nb) in zip(a.samples, b.samples):
            assert na - nb == 1 + int(v.chi_total <= t)


def test_count_table_csv():
    t = CountTable(((1, 2), (2, 6)), "x", ((1, 0, 1), (1, 4, 1)))
    assert t.to_csv() == "t,N,N_dim0,N_dim1,N_dim2\n1,2,1,0,1\n2,6,1,4,1\n"
    with pytest.raises(ValueError):
        CountTable(((2, 1), (1, 1)), "x")


def test_fit_slope_exact_power():
    ts = list(range(10, 50))
    assert fit_slope(ts, [t ** 3 for t in ts]) == pytest.approx(3)
    assert fit_slope([5, 5], [1, 2]) is None


def test_fit_exponent_statuses():
    bounds = ExponentBounds(4, 4, 1, 2, 1)
    lin = CountTable(tuple((t, 3 * t) for t in range(1, 41)), "x")
    rep = fit_exponent(lin, bounds)
    assert rep.status == "pass" and rep.fitted_slope == pytest.approx(1)
    steep = CountTable(tuple((t, t ** 5) for t in range(1, 41)), "x")
    assert fit_exponent(steep, bounds).status == "fail"
    few = CountTable(((1, 2), (2, 3), (3, 4)), "x")
    assert fit_exponent(few, bounds).status == "inconclusive"
    ones = CountTable(tuple((t, 1) for t in range(1, 41)), "x")
    rep = fit_exponent(ones, bounds)
    assert rep.status == "inconclusive" and not rep.passed
    assert rep.to_json()["fitted_slope"] is None


def test_fit_single_simple_block():
    v = VarietyConfig.single(FactorBlock("E", Z, (3,)))
    rep = fit_exponent(counting_function(v, range(1, 60)), theorem_bound_exponent(v))
    assert rep.status == "pass" and rep.fitted_slope == pytest.approx(0, abs=1e-12)
    assert rep.exponent_bound == 0


def test_fit_non_cm(non_cm):
    rep = fit_exponent(counting_function(non_cm, range(1, 501)), theorem_bound_exponent(non_cm))
    assert rep.passed and abs(rep.fitted_slope - 1) <= 0.1


def test_isogeny_identity_is_tight(non_cm):
    rep = check_isogeny_inequalities(non_cm, identity(4), 20)
    assert rep.ok and rep.n_a == rep.n_b


def test_isogeny_doubling(non_cm):
    sub = standard_isogeny_sublattice(non_cm, 16)
    assert sub == tuple(tuple(2 * x for x in r) for r in identity(4))
    subs = Enumerator().variety(non_cm, 30)
    for c, d_s, chi_star in transferred_chis(non_cm, sub, subs):
        assert chi_star == d_s * c and c <= chi_star <= 16 * c
    by_dim = {s.dim: set() for s in subs}
    for s, (_, d_s, _) in zip(subs, transferred_chis(non_cm, sub, subs)):
        by_dim[s.dim].add(d_s)
    assert by_dim == {0: {1}, 1: {4}, 2: {16}}
    rep = check_isogeny_inequalities(non_cm, sub, 50)
    assert rep.ok and rep.exact_up_to == 800


def test_isogeny_lower_bound_mode(gaussian):
    sub = standard_isogeny_sublattice(gaussian, 4)
    rep = check_isogeny_inequalities(gaussian, sub, 20, enumerate_to=40)
    assert rep.ok and rep.exact_up_to == 40


def test_isogeny_transfer_bounds_index4(two_block):
    sub = standard_isogeny_sublattice(two_block, 4)
    subs = Enumerator().variety(two_block, 40)
    for c, d_s, chi_star in transferred_chis(two_block, sub, subs):
        assert c <= chi_star <= 4 * c
    with pytest.raises(ValueError):
        standard_isogeny_sublattice(two_block, 8)


def test_growth_rate_constant(non_cm):
    # N(t) ~ (3 / pi) t for the primitive disk count up to sign
    n = counting_function(non_cm, [2000]).counts[0]
    assert n / 2000 == pytest.approx(3 / math.pi, rel=0.02)
