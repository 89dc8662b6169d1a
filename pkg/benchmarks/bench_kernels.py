"""Compare the compiled and pure-Python scan kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Each case runs the same ``kernels.scan`` call on both backends, checks
that the outputs agree and prints the best wall time of each.
"""

import argparse
import time

from avsub import kernels
from avsub.engine import Enumerator, HomSpace, SliceBounds
from avsub.kernels import _pykernels
from avsub.quadform import GramForm
from avsub.torus import EndRing, FactorBlock

GAUSS = EndRing.order(0, 1)


def cases():
    disk = GramForm(((2, 0), (0, 2)))
    levels, dets = disk.levels
    yield "count x^2+y^2 <= 10^6", (levels, dets, 2 * 10 ** 6, None, 0, True)

    hom = HomSpace(GAUSS, (1,))
    levels, dets = hom.form.levels
    b = SliceBounds(1, 200)
    a = 60
    yield f"Gaussian E x E slice, a={a}, t=200", (levels, dets, 2 * b.form_bound(a), hom.mats, a, False)

    hom = HomSpace(GAUSS, (1, 1))
    levels, dets = hom.form.levels
    b = SliceBounds(1, 30)
    a = 10
    yield f"Gaussian E^3 slice, a={a}, t=30", (levels, dets, 2 * b.form_bound(a), hom.mats, a, False)


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels._ckernels is None:
        raise SystemExit("compiled kernel not available; build with pip install --no-build-isolation -e .")
    print(f"{'case':<40} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name, call in cases():
        tp, out_p = best_of(lambda: _pykernels.scan(*call), args.repeat)
        tc, out_c = best_of(lambda: kernels._ckernels.scan(*call), args.repeat)
        if out_p != out_c:
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:<40} {tp:>11.4f} {tc:>11.4f} {tp / tc:>7.1f}x")
    block = FactorBlock("E", GAUSS, (1, 1))
    for backend in ("python", "cython"):
        t, subs = best_of(lambda: Enumerator(backend=backend).block(block, 100), 1)
        print(f"{'full enumeration Gaussian E x E, t=100':<40} {backend:>11} {t:>11.4f}  ({len(subs)} subvarieties)")


if __name__ == "__main__":
    main()
