"""Pure-Python ellipsoid scan; the reference twin of ``_ckernels.pyx``.

See ``avsub.kernels`` for the argument conventions.
"""

from math import gcd, isqrt


def _level_range(T, i, prefix, bound):
    """Integer interval of x with T(prefix + [x]) <= bound, or None."""
    row = T[i]
    a = row[i]
    b = 0
    c = 0
    for j in range(i):
        pj = prefix[j]
        if pj:
            b += row[j] * pj
            tj = T[j]
            s = 0
            for l in range(i):
                s += tj[l] * prefix[l]
            c += pj * s
    rest = c - bound
    disc = b * b - a * rest
    if disc < 0:
        return None
    s = isqrt(disc)
    hi = (s - b) // a
    if a * (hi + 1) * (hi + 1) + 2 * b * (hi + 1) + rest <= 0:
        hi += 1
    lo = -((b + s) // a)
    if a * (lo - 1) * (lo - 1) + 2 * b * (lo - 1) + rest <= 0:
        lo -= 1
    if lo > hi:
        return None
    return lo, hi


def kernel_count_2col(entries, a):
    """Kernel size mod ``a`` of an integer matrix with two columns.

    ``entries`` is a flat row-major list ``[m00, m01, m10, m11, ...]``.
    """
    g1 = 0
    for e in entries:
        g1 = gcd(g1, e)
    if g1 == 0:
        return a * a
    g2 = 0
    n = len(entries) // 2
    for r in range(n):
        x0, y0 = entries[2 * r], entries[2 * r + 1]
        for s in range(r + 1, n):
            g2 = gcd(g2, x0 * entries[2 * s + 1] - y0 * entries[2 * s])
    if g2 == 0:
        return a * gcd(a, g1)
    return gcd(a, g1) * gcd(a, g2 // g1)


def scan(levels, dets, c2, mats=None, a=0, count_only=False):
    H = len(levels)
    if c2 < 0:
        return 0 if count_only else []
    if H == 0:
        ok = mats is None or (a * a == a)
        if count_only:
            return int(ok)
        return [()] if ok else []
    bounds = [d * c2 for d in dets]
    want_deg = mats is not None
    if want_deg:
        width = len(mats[0])
    out = []
    count = 0
    prefix = [0] * H

    def leaf(lo, hi):
        nonlocal count
        if not want_deg:
            if count_only:
                count += hi - lo + 1
            else:
                for x in range(lo, hi + 1):
                    prefix[H - 1] = x
                    out.append(tuple(prefix))
            return
        base = [0] * width
        for l in range(H - 1):
            pl = prefix[l]
            if pl:
                ml = mats[l]
                for r in range(width):
                    base[r] += pl * ml[r]
        last = mats[H - 1]
        for x in range(lo, hi + 1):
            entries = [base[r] + x * last[r] for r in range(width)]
            if kernel_count_2col(entries, a) == a:
                if count_only:
                    count += 1
                else:
                    prefix[H - 1] = x
                    out.append(tuple(prefix))

    def rec(i):
        rng = _level_range(levels[i], i, prefix, bounds[i])
        if rng is None:
            return
        lo, hi = rng
        if i == H - 1:
            leaf(lo, hi)
            return
        for x in range(lo, hi + 1):
            prefix[i] = x
            rec(i + 1)
        prefix[i] = 0

    rec(0)
    return count if count_only else out
