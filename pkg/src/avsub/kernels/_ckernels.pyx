# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ellipsoid scan. Same contract as ``_pykernels.scan``.

All arithmetic is int64; the caller (``avsub.kernels``) only dispatches
here after checking that no intermediate can overflow.
"""

from libc.stdlib cimport malloc, realloc, free
from libc.math cimport sqrt


cdef inline long long _gcd(long long x, long long y) noexcept nogil:
    if x < 0:
        x = -x
    if y < 0:
        y = -y
    while y:
        x, y = y, x % y
    return x


cdef inline long long _isqrt(long long n) noexcept nogil:
    cdef long long s = <long long>sqrt(<double>n)
    while s * s > n:
        s -= 1
    while (s + 1) * (s + 1) <= n:
        s += 1
    return s


cdef inline long long _floordiv(long long x, long long y) noexcept nogil:
    # y > 0
    cdef long long q = x / y
    if (x % y != 0) and (x < 0):
        q -= 1
    return q


cdef int _level_range(const long long* T, int H, int i, const long long* x,
                      long long bound, long long* lo, long long* hi) noexcept nogil:
    cdef const long long* row = T + i * H
    cdef long long a = row[i]
    cdef long long b = 0, c = 0, s, rest, disc, h, l
    cdef int j, k
    for j in range(i):
        if x[j] != 0:
            b += row[j] * x[j]
            s = 0
            for k in range(i):
                s += T[j * H + k] * x[k]
            c += x[j] * s
    rest = c - bound
    disc = b * b - a * rest
    if disc < 0:
        return 0
    s = _isqrt(disc)
    h = _floordiv(s - b, a)
    if a * (h + 1) * (h + 1) + 2 * b * (h + 1) + rest <= 0:
        h += 1
    l = -_floordiv(b + s, a)
    if a * (l - 1) * (l - 1) + 2 * b * (l - 1) + rest <= 0:
        l -= 1
    if l > h:
        return 0
    lo[0] = l
    hi[0] = h
    return 1


cdef inline long long _kernel_count(const long long* e, int n, long long a) noexcept nogil:
    cdef long long g1 = 0, g2 = 0
    cdef int r, s
    for r in range(2 * n):
        g1 = _gcd(g1, e[r])
    if g1 == 0:
        return a * a
    for r in range(n):
        for s in range(r + 1, n):
            g2 = _gcd(g2, e[2 * r] * e[2 * s + 1] - e[2 * r + 1] * e[2 * s])
    if g2 == 0:
        return a * _gcd(a, g1)
    return _gcd(a, g1) * _gcd(a, g2 / g1)


cdef struct Buf:
    long long* data
    Py_ssize_t size
    Py_ssize_t cap
    int failed


cdef inline void _push(Buf* buf, const long long* x, int H) noexcept nogil:
    cdef int j
    cdef long long* p
    if buf.size + H > buf.cap:
        buf.cap = 2 * buf.cap + H
        p = <long long*>realloc(buf.data, buf.cap * sizeof(long long))
        if p == NULL:
            buf.failed = 1
            return
        buf.data = p
    for j in range(H):
        buf.data[buf.size + j] = x[j]
    buf.size += H


cdef long long _scan(const long long* T, const long long* bounds, int H,
                     const long long* M, int width, long long a, int count_only,
                     Buf* buf, long long* x, long long* his, long long* base) noexcept nogil:
    cdef long long count = 0, lo, hi, v
    cdef int i = 0, r, l
    cdef bint ok
    if not _level_range(T, H, 0, x, bounds[0], &lo, &hi):
        return 0
    x[0] = lo
    his[0] = hi
    while True:
        if i == H - 1:
            lo = x[i]
            hi = his[i]
            if M == NULL:
                if count_only:
                    count += hi - lo + 1
                else:
                    for v in range(lo, hi + 1):
                        x[i] = v
                        _push(buf, x, H)
            else:
                for r in range(width):
                    base[r] = 0
                for l in range(H - 1):
                    if x[l] != 0:
                        for r in range(width):
                            base[r] += x[l] * M[l * width + r]
                for v in range(lo, hi + 1):
                    for r in range(width):
                        base[width + r] = base[r] + v * M[(H - 1) * width + r]
                    if _kernel_count(base + width, width // 2, a) == a:
                        count += 1
                        if not count_only:
                            x[i] = v
                            _push(buf, x, H)
            # backtrack
            x[i] = 0
            i -= 1
            while i >= 0:
                x[i] += 1
                if x[i] <= his[i]:
                    break
                x[i] = 0
                i -= 1
            if i < 0:
                return count
        else:
            if _level_range(T + (i + 1) * H * H, H, i + 1, x, bounds[i + 1], &lo, &hi):
                i += 1
                x[i] = lo
                his[i] = hi
            else:
                while i >= 0:
                    x[i] += 1
                    if x[i] <= his[i]:
                        break
                    x[i] = 0
                    i -= 1
                if i < 0:
                    return count


def scan(levels, dets, c2, mats=None, long long a=0, bint count_only=False):
    cdef int H = len(levels)
    cdef int width = 0
    cdef int i, r, s, l
    cdef Py_ssize_t j
    cdef long long count
    cdef long long* T
    cdef long long* bounds
    cdef long long* M = NULL
    cdef long long* x
    cdef long long* his
    cdef long long* base
    cdef Buf buf
    if c2 < 0:
        return 0 if count_only else []
    if H == 0:
        ok = mats is None or (a * a == a)
        if count_only:
            return int(ok)
        return [()] if ok else []
    if mats is not None:
        width = len(mats[0])
    T = <long long*>malloc(H * H * H * sizeof(long long))
    bounds = <long long*>malloc(H * sizeof(long long))
    x = <long long*>malloc(H * sizeof(long long))
    his = <long long*>malloc(H * sizeof(long long))
    base = <long long*>malloc((2 * width + 1) * sizeof(long long))
    if mats is not None:
        M = <long long*>malloc(H * width * sizeof(long long))
    buf.data = NULL
    buf.size = 0
    buf.cap = 0
    buf.failed = 0
    try:
        for i in range(H):
            lev = levels[i]
            bounds[i] = dets[i] * c2
            x[i] = 0
            his[i] = 0
            for r in range(H):
                for s in range(H):
                    T[i * H * H + r * H + s] = lev[r][s] if (r <= i and s <= i) else 0
            if M != NULL:
                for r in range(width):
                    M[i * width + r] = mats[i][r]
        with nogil:
            count = _scan(T, bounds, H, M, width, a, count_only, &buf, x, his, base)
        if buf.failed:
            raise MemoryError()
        if count_only:
            return count
        out = []
        for j in range(0, buf.size, H):
            out.append(tuple([buf.data[j + r] for r in range(H)]))
        return out
    finally:
        free(T)
        free(bounds)
        free(x)
        free(his)
        free(base)
        if M != NULL:
            free(M)
        if buf.data != NULL:
            free(buf.data)
