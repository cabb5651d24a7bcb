# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled integer rank kernel.

Same elimination as ``_rank_py.rank_int`` but on a C int64 buffer. Every
multiply and subtract is overflow-checked; on overflow ``OverflowError`` is
raised and the caller retries with arbitrary-precision integers.
"""

from libc.stdlib cimport malloc, free, llabs

cdef extern from *:
    """
    static int hoc_mul(long long a, long long b, long long *out) {
        return __builtin_mul_overflow(a, b, out);
    }
    static int hoc_sub(long long a, long long b, long long *out) {
        return __builtin_sub_overflow(a, b, out);
    }
    """
    int hoc_mul(long long a, long long b, long long *out) nogil
    int hoc_sub(long long a, long long b, long long *out) nogil


cdef inline long long _gcd(long long a, long long b) nogil:
    a = llabs(a)
    b = llabs(b)
    while b:
        a, b = b, a % b
    return a


cdef int _eliminate(long long *a, Py_ssize_t m, Py_ssize_t n, Py_ssize_t *rank_out) nogil:
    cdef Py_ssize_t rank = 0, col, i, j, piv
    cdef long long p, f, g, mp, mf, best, v, t
    cdef long long *prow
    cdef long long *row
    for col in range(n):
        if rank == m:
            break
        piv = -1
        best = 0
        for i in range(rank, m):
            v = a[i * n + col]
            if v != 0 and (piv < 0 or llabs(v) < best):
                piv = i
                best = llabs(v)
                if best == 1:
                    break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(n):
                t = a[rank * n + j]
                a[rank * n + j] = a[piv * n + j]
                a[piv * n + j] = t
        prow = a + rank * n
        p = prow[col]
        for i in range(rank + 1, m):
            row = a + i * n
            f = row[col]
            if f == 0:
                continue
            g = _gcd(p, f)
            mp = p // g
            mf = f // g
            for j in range(col + 1, n):
                if hoc_mul(row[j], mp, &v):
                    return 1
                if prow[j] != 0:
                    if hoc_mul(mf, prow[j], &t):
                        return 1
                    if hoc_sub(v, t, &v):
                        return 1
                row[j] = v
            row[col] = 0
            g = 0
            for j in range(col + 1, n):
                if row[j] != 0:
                    g = _gcd(g, row[j])
                    if g == 1:
                        break
            if g > 1:
                for j in range(col + 1, n):
                    row[j] = row[j] // g
        rank += 1
    rank_out[0] = rank
    return 0


def rank_int(rows, Py_ssize_t ncols):
    """Rank over Q of an integer matrix given as a list of row lists."""
    cdef Py_ssize_t m = len(rows), i, j
    cdef Py_ssize_t rank = 0
    cdef long long *a
    cdef int status
    if m == 0 or ncols == 0:
        return 0
    a = <long long *> malloc(m * ncols * sizeof(long long))
    if a == NULL:
        raise MemoryError()
    try:
        for i in range(m):
            r = rows[i]
            for j in range(ncols):
                a[i * ncols + j] = r[j]
        with nogil:
            status = _eliminate(a, m, ncols, &rank)
        if status:
            raise OverflowError("int64 overflow in rank kernel")
        return rank
    finally:
        free(a)
