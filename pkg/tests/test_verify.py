from avsub.engine import Audit, Enumerator
from avsub.torus import VarietyConfig
from avsub.verify import (
    SuiteResult,
    check_complements,
    check_enumeration_audit,
    check_lattices,
    check_permutations,
    check_slice_growth,
    run_verify,
)


def test_suite_result_line():
    r = SuiteResult("x")
    r.check(True)
    assert r.line() == "PASS x: 1 checks, 0 failures"
    r.check(False, "boom")
    assert r.line().startswith("FAIL x: 2 checks, 1 failures")


def test_run_verify_small(non_cm, gaussian, two_block):
    for v in (non_cm, gaussian, two_block):
        results = run_verify(v, 30, iso_t=10)
        assert all(r.ok for r in results), [r.line() for r in results if not r.ok]
        assert {r.name.split(":")[0] for r in results} >= {"permutation invariance"}


def test_permutation_check_detects_asymmetry(non_cm):
    subs = Enumerator().variety(non_cm, 10)
    # drop the curve {(z, 2z)}; its mirror {(2z, z)} stays
    broken = [s for s in subs if s.lattice != ((1, 0, 2, 0), (0, 1, 0, 2))]
    assert len(broken) == len(subs) - 1
    assert not check_permutations(non_cm, broken, 10).ok


def test_complement_check_detects_bad_chi(non_cm):
    from dataclasses import replace

    subs = Enumerator().variety(non_cm, 5)
    bad = [replace(subs[3], chi=subs[3].chi + 1)]
    assert not check_complements(non_cm, bad).ok
    assert not check_lattices(non_cm, bad).ok


def test_audit_suite_reports_failures():
    audit = Audit()
    audit.check("graph chi formula = Pfaffian", False, "synthetic")
    assert not check_enumeration_audit(audit, []).ok


def test_slice_growth(gaussian):
    r = check_slice_growth(gaussian, 60)
    assert r.ok and r.checks == 1
    single = VarietyConfig((gaussian.blocks[0].tail(),))
    assert check_slice_growth(single, 10).checks == 0
