# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Rademacher averages and exhaustive subset search."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, INFINITY
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef inline double _norm_pow(double* s, Py_ssize_t m, double r, double power) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0, a
    if r == INFINITY:
        for i in range(m):
            a = fabs(s[i])
            if a > acc:
                acc = a
        return pow(acc, power)
    if r == 2.0:
        for i in range(m):
            acc += s[i] * s[i]
        if power == 2.0:
            return acc
        return pow(acc, 0.5 * power)
    if r == 1.0:
        for i in range(m):
            acc += fabs(s[i])
        return pow(acc, power)
    for i in range(m):
        acc += pow(fabs(s[i]), r)
    return pow(acc, power / r)


def rademacher_average(double[:, :, ::1] A, long[::1] counts, double r, double power):
    """Per cell, the mean over all sign patterns of ``||sum_j e_j A[c, j]||_r ** power``.

    Only the first ``counts[c]`` rows of ``A[c]`` take part.  The global sign
    symmetry halves the enumeration: the first sign is pinned to +1.
    """
    cdef Py_ssize_t cells = A.shape[0], m = A.shape[2]
    cdef Py_ssize_t c, i, j, k
    cdef uint64_t g, npat
    cdef double total
    cdef double[::1] s = np.zeros(max(m, 1), dtype=np.float64)
    cdef signed char[::1] eps = np.ones(max(A.shape[1], 1), dtype=np.int8)
    out = np.zeros(cells, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for c in range(cells):
            k = counts[c]
            if k == 0:
                res[c] = 0.0
                continue
            for i in range(m):
                s[i] = 0.0
            for j in range(k):
                eps[j] = 1
                for i in range(m):
                    s[i] += A[c, j, i]
            total = _norm_pow(&s[0], m, r, power)
            npat = (<uint64_t>1) << (k - 1)
            for g in range(1, npat):
                # gray code: flip sign of row 1 + (trailing zeros of g)
                j = 1
                while not (g >> (j - 1)) & 1:
                    j += 1
                if eps[j] == 1:
                    eps[j] = -1
                    for i in range(m):
                        s[i] -= 2.0 * A[c, j, i]
                else:
                    eps[j] = 1
                    for i in range(m):
                        s[i] += 2.0 * A[c, j, i]
                total += _norm_pow(&s[0], m, r, power)
            res[c] = total / <double>npat
    return out


cdef inline bint _lex_less(uint64_t a, uint64_t b) noexcept nogil:
    # sorted-index tuple of subset a precedes that of b
    cdef uint64_t d = a ^ b
    cdef uint64_t low
    cdef int x = 0
    if d == 0:
        return False
    low = d & (~d + 1)
    while (low >> x) != 1:
        x += 1
    if (a >> x) & 1:
        return (b >> (x + 1)) != 0
    return (a >> (x + 1)) == 0


cdef inline bint _better(int64_t n1, int64_t d1, uint64_t m1,
                         int64_t n2, int64_t d2, uint64_t m2) noexcept nogil:
    # is (n1/d1, m1) preferred to (n2/d2, m2): larger value, then lex-smaller set
    cdef int64_t lhs = n1 * d2, rhs = n2 * d1
    if lhs != rhs:
        return lhs > rhs
    return _lex_less(m1, m2)


def c1_search(int[:, ::1] cell_members, long[::1] weights,
              int[:, ::1] cover_members, uint64_t start, uint64_t stop):
    """Best ``(integral, cover, mask)`` over masks in ``[start, stop)``.

    ``integral`` is the sum over cells of the largest member weight present
    (members listed per cell, padded with -1); ``cover`` counts cells hit by
    the sigma-image of some member.
    """
    cdef Py_ssize_t cells = cell_members.shape[0], L = cell_members.shape[1]
    cdef Py_ssize_t L2 = cover_members.shape[1]
    cdef Py_ssize_t c, j
    cdef int idx
    cdef uint64_t mask, best_mask = 0
    cdef int64_t num, den, best_num = -1, best_den = 1, w, cmax
    with nogil:
        for mask in range(start, stop):
            num = 0
            den = 0
            for c in range(cells):
                cmax = 0
                for j in range(L):
                    idx = cell_members[c, j]
                    if idx < 0:
                        break
                    if (mask >> idx) & 1:
                        w = weights[idx]
                        if w > cmax:
                            cmax = w
                num += cmax
                for j in range(L2):
                    idx = cover_members[c, j]
                    if idx < 0:
                        break
                    if (mask >> idx) & 1:
                        den += 1
                        break
            if den == 0:
                continue
            if best_num < 0 or _better(num, den, mask, best_num, best_den, best_mask):
                best_num, best_den, best_mask = num, den, mask
    return best_num, best_den, best_mask


def carleson_ratio_search(long[:, ::1] image_weights, long[:, ::1] preimage_weights,
                          uint64_t start, uint64_t stop):
    """Best ``(num, den, mask)`` of ``[[sigma(C)]] / [[C]]`` over masks in ``[start, stop)``.

    ``image_weights[i, j]`` is the scaled ``|J|/|I|`` when member ``j`` lies
    inside member ``i`` (zero otherwise); ``preimage_weights`` is the same
    for the sigma-images.
    """
    cdef Py_ssize_t n = image_weights.shape[0]
    cdef Py_ssize_t i, j
    cdef uint64_t mask, best_mask = 0
    cdef int64_t num, den, s1, s2, best_num = -1, best_den = 1
    with nogil:
        for mask in range(start, stop):
            num = 0
            den = 0
            for i in range(n):
                if not (mask >> i) & 1:
                    continue
                s1 = 0
                s2 = 0
                for j in range(n):
                    if (mask >> j) & 1:
                        s1 += image_weights[i, j]
                        s2 += preimage_weights[i, j]
                if s1 > den:
                    den = s1
                if s2 > num:
                    num = s2
            if den == 0:
                continue
            if best_num < 0 or _better(num, den, mask, best_num, best_den, best_mask):
                best_num, best_den, best_mask = num, den, mask
    return best_num, best_den, best_mask
