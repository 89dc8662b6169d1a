import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from avsub import kernels
from avsub.kernels import _pykernels
from avsub.linalg import kernel_count_mod
from avsub.quadform import GramForm

needs_cython = pytest.mark.skipif(kernels._ckernels is None, reason="compiled kernel not built")


@st.composite
def forms(draw, max_rank=4):
    n = draw(st.integers(1, max_rank))
    rows = draw(st.lists(st.lists(st.integers(-2, 2), min_size=n, max_size=n), min_size=n, max_size=n))
    diag = draw(st.lists(st.integers(1, 3), min_size=n, max_size=n))
    g2 = [[2 * sum(r[i] * r[j] for r in rows) + (2 * diag[i] if i == j else 0) for j in range(n)]
          for i in range(n)]
    return GramForm(tuple(map(tuple, g2)))


def _mats(n, k, seed):
    # n coordinates, each a flattened (2k x 2) integer matrix
    vals = [((seed * 7 + i * 13 + j * 5) % 5) - 2 for i in range(n) for j in range(4 * k)]
    return tuple(tuple(vals[i * 4 * k:(i + 1) * 4 * k]) for i in range(n))


@settings(max_examples=80)
@given(st.lists(st.integers(-8, 8), min_size=2, max_size=8).filter(lambda x: len(x) % 2 == 0),
       st.integers(1, 9))
def test_kernel_count_2col_matches_snf(entries, a):
    rows = [entries[2 * r:2 * r + 2] for r in range(len(entries) // 2)]
    assert kernel_count_2col(entries, a) == kernel_count_mod(rows, a, domain_rank=2)


def kernel_count_2col(entries, a):
    return _pykernels.kernel_count_2col(tuple(entries), a)


@settings(max_examples=50, deadline=None)
@given(forms(), st.integers(0, 10))
def test_python_scan_brute_force(q, c):
    levels, dets = q.levels
    box = math.isqrt(c) + 1
    brute = [v for v in itertools.product(range(-box, box + 1), repeat=q.rank) if q(v) <= c]
    assert _pykernels.scan(levels, dets, 2 * c) == brute
    assert _pykernels.scan(levels, dets, 2 * c, count_only=True) == len(brute)


@needs_cython
@settings(max_examples=80, deadline=None)
@given(forms(), st.integers(0, 40), st.integers(1, 6), st.integers(0, 50))
def test_backends_agree(q, c, a, seed):
    levels, dets = q.levels
    k = max(1, q.rank // 2)
    mats = _mats(q.rank, k, seed)
    py = _pykernels.scan(levels, dets, 2 * c, mats, a)
    cy = kernels._ckernels.scan(levels, dets, 2 * c, mats, a, False)
    assert py == cy
    plain = _pykernels.scan(levels, dets, 2 * c)
    assert plain == kernels._ckernels.scan(levels, dets, 2 * c, None, 0, False)
    assert kernels._ckernels.scan(levels, dets, 2 * c, None, 0, True) == len(plain)


@settings(max_examples=40, deadline=None)
@given(forms(max_rank=3), st.integers(0, 20), st.integers(1, 5), st.integers(0, 50))
def test_degree_filter_against_snf(q, c, a, seed):
    levels, dets = q.levels
    mats = _mats(q.rank, 1, seed)
    kept = kernels.scan(levels, dets, 2 * c, mats, a)
    for v in kernels.scan(levels, dets, 2 * c):
        flat = [sum(x * m[r] for x, m in zip(v, mats)) for r in range(4)]
        rows = [flat[0:2], flat[2:4]]
        assert (v in kept) == (kernel_count_mod(rows, a, domain_rank=2) == a)


def test_overflow_guard_falls_back():
    q = GramForm(((2, 0), (0, 2)))
    levels, dets = q.levels
    huge = 1 << 70
    assert not kernels._fits_int64(levels, dets, huge, None)
    # pure Python handles it; only the count is requested to keep it small
    assert kernels.scan(levels, dets, 2 * 10 ** 4, count_only=True) == 31417


def test_zero_rank():
    assert kernels.scan((), (), 10) == [()]
    assert kernels.scan((), (), 10, (), 1) == [()]
    assert kernels.scan((), (), 10, (), 2) == []


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
