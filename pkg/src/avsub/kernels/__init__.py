"""Hot loop of the enumeration: scanning integer points of an ellipsoid.

``scan(levels, dets, c2, mats=None, a=0, count_only=False)`` walks
``{v in Z^H : v G2 v^T <= c2}`` in lexicographic order, where ``G2`` is an
integral positive-definite matrix (twice the Gram matrix).

``levels[i]`` is the integral matrix ``det(G2[>i]) * (G2 / G2[>i])`` (the
scaled Schur complement of the trailing block, size ``i+1``) and
``dets[i] = det(G2[>i])``; ``levels[H-1]`` is ``G2`` itself. With these,
every partial prefix test is an exact integer comparison.

If ``mats`` is given, a point ``v`` is kept only when the two-column
integer matrix ``sum(v_l * mats[l])`` (flattened row-major) has exactly
``a`` kernel elements mod ``a``.

The compiled backend is used when it is importable and every intermediate
fits in int64; otherwise the pure-Python backend runs. Set
``AVSUB_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from . import _pykernels

try:
    if os.environ.get("AVSUB_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"

_LIMIT = 1 << 62


@lru_cache(maxsize=256)
def _inverse_diagonal(g2: tuple) -> tuple:
    n = len(g2)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(g2)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return tuple(aug[i][n + i] for i in range(n))


def _fits_int64(levels, dets, c2, mats) -> bool:
    H = len(levels)
    if H == 0:
        return True
    g2 = tuple(tuple(r) for r in levels[-1])
    # on the ellipsoid |v_i| <= sqrt(c2 * (G2^-1)_ii)
    xmax = 0
    for d in _inverse_diagonal(g2):
        xmax = max(xmax, isqrt(int(max(c2, 0) * d) + 1) + 2)
    tmax = max(abs(e) for lev in levels for row in lev for e in row)
    bmax = H * tmax * xmax
    cmax = H * H * tmax * xmax * xmax
    rmax = max(dets) * max(c2, 0)
    if bmax * bmax >= _LIMIT or tmax * (cmax + rmax) >= _LIMIT:
        return False
    if mats is not None:
        mmax = max((abs(e) for m in mats for e in m), default=0)
        emax = H * mmax * xmax
        if 2 * emax * emax >= _LIMIT:
            return False
    return True


def scan(levels, dets, c2, mats=None, a=0, count_only=False, backend=None):
    use = backend or BACKEND
    if use == "cython" and _ckernels is not None and _fits_int64(levels, dets, c2, mats):
        return _ckernels.scan(levels, dets, c2, mats, a, count_only)
    return _pykernels.scan(levels, dets, c2, mats, a, count_only)


kernel_count_2col = _pykernels.kernel_count_2col

__all__ = ["BACKEND", "scan", "kernel_count_2col"]
