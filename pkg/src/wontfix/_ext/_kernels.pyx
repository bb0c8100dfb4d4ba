# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: SMO pair optimization and per-feature split scanning.

Statement-for-statement twin of ``_fallback.py``; see there for docs.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log2
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef inline uint64_t _next(uint64_t* state) noexcept nogil:
    cdef uint64_t x = state[0]
    x ^= x << 13
    x ^= x >> 7
    x ^= x << 17
    state[0] = x
    return x


cdef struct Smo:
    double* K
    double* y
    double* alpha
    double* f
    Py_ssize_t n
    double C
    double tol
    double eps
    double b
    uint64_t rng
    long steps
    bint record


cdef int _take_step(Smo* s, Py_ssize_t i1, Py_ssize_t i2, list deltas) except -1:
    cdef double a1, a2, y1, y2, E1, E2, sg, L, H, k11, k12, k22, eta, a2n, a1n
    cdef double g1, g2, L1, H1, Lobj, Hobj, d1, d2, b1, b2, b, t1, t2, gain
    cdef double* row1
    cdef double* row2
    cdef Py_ssize_t k, n = s.n
    cdef double C = s.C
    if i1 == i2:
        return 0
    b = s.b
    a1 = s.alpha[i1]
    a2 = s.alpha[i2]
    y1 = s.y[i1]
    y2 = s.y[i2]
    E1 = s.f[i1] - b - y1
    E2 = s.f[i2] - b - y2
    sg = y1 * y2
    if y1 != y2:
        L = a2 - a1 if a2 - a1 > 0.0 else 0.0
        H = C + a2 - a1 if C + a2 - a1 < C else C
    else:
        L = a1 + a2 - C if a1 + a2 - C > 0.0 else 0.0
        H = a1 + a2 if a1 + a2 < C else C
    if L >= H:
        return 0
    row1 = s.K + i1 * n
    row2 = s.K + i2 * n
    k11 = row1[i1]
    k12 = row1[i2]
    k22 = row2[i2]
    eta = k11 + k22 - 2.0 * k12
    if eta > 0.0:
        a2n = a2 + y2 * (E1 - E2) / eta
        if a2n < L:
            a2n = L
        elif a2n > H:
            a2n = H
    else:
        g1 = y1 * (E1 + b) - a1 * k11 - sg * a2 * k12
        g2 = y2 * (E2 + b) - sg * a1 * k12 - a2 * k22
        L1 = a1 + sg * (a2 - L)
        H1 = a1 + sg * (a2 - H)
        Lobj = L1 * g1 + L * g2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + sg * L * L1 * k12
        Hobj = H1 * g1 + H * g2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + sg * H * H1 * k12
        if Lobj < Hobj - s.eps:
            a2n = L
        elif Lobj > Hobj + s.eps:
            a2n = H
        else:
            a2n = a2
    if a2n < s.eps:
        a2n = 0.0
    elif a2n > C - s.eps:
        a2n = C
    if fabs(a2n - a2) <= s.eps:
        return 0
    a1n = a1 + sg * (a2 - a2n)
    if a1n < s.eps:
        a2n += sg * a1n
        a1n = 0.0
    elif a1n > C - s.eps:
        a2n += sg * (a1n - C)
        a1n = C
    if a2n < 0.0:
        a2n = 0.0
    elif a2n > C:
        a2n = C
    d1 = a1n - a1
    d2 = a2n - a2
    if s.record:
        gain = (d1 + d2 - y1 * s.f[i1] * d1 - y2 * s.f[i2] * d2
                - 0.5 * (d1 * d1 * k11 + d2 * d2 * k22 + 2.0 * sg * d1 * d2 * k12))
        deltas.append(gain)
    b1 = E1 + y1 * d1 * k11 + y2 * d2 * k12 + b
    b2 = E2 + y1 * d1 * k12 + y2 * d2 * k22 + b
    if 0.0 < a1n < C:
        b = b1
    elif 0.0 < a2n < C:
        b = b2
    else:
        b = 0.5 * (b1 + b2)
    t1 = y1 * d1
    t2 = y2 * d2
    for k in range(n):
        s.f[k] += t1 * row1[k] + t2 * row2[k]
    s.alpha[i1] = a1n
    s.alpha[i2] = a2n
    s.b = b
    s.steps += 1
    return 1


cdef int _examine(Smo* s, Py_ssize_t i2, list deltas) except -1:
    cdef double b = s.b, C = s.C
    cdef double y2 = s.y[i2], a2 = s.alpha[i2]
    cdef double E2 = s.f[i2] - b - y2
    cdef double r2 = E2 * y2
    cdef double gap, best_gap = -1.0
    cdef Py_ssize_t k, off, start, best = -1, n_free = 0, n = s.n
    if not ((r2 < -s.tol and a2 < C) or (r2 > s.tol and a2 > 0.0)):
        return 0
    for k in range(n):
        if 0.0 < s.alpha[k] < C:
            n_free += 1
            gap = fabs(s.f[k] - b - s.y[k] - E2)
            if gap > best_gap:
                best_gap = gap
                best = k
    if n_free > 1 and best >= 0 and _take_step(s, best, i2, deltas):
        return 1
    start = <Py_ssize_t>(_next(&s.rng) % <uint64_t>n)
    for off in range(n):
        k = (start + off) % n
        if 0.0 < s.alpha[k] < C and _take_step(s, k, i2, deltas):
            return 1
    start = <Py_ssize_t>(_next(&s.rng) % <uint64_t>n)
    for off in range(n):
        k = (start + off) % n
        if _take_step(s, k, i2, deltas):
            return 1
    return 0


def smo_solve(K, y, double C, double tol, double step_eps, long max_passes, long seed, bint record):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Kc = np.ascontiguousarray(K, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] yc = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yc.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] alpha = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] f = np.zeros(n)
    cdef Smo s
    cdef list deltas = []
    cdef long passes = 0, changed
    cdef bint examine_all = True, converged = False
    cdef uint64_t st = (<uint64_t><int64_t>seed) * <uint64_t>0x9E3779B97F4A7C15 + <uint64_t>0x2545F4914F6CDD1D
    if st == 0:
        st = 1
    s.K = &Kc[0, 0] if n else NULL
    s.y = &yc[0] if n else NULL
    s.alpha = &alpha[0] if n else NULL
    s.f = &f[0] if n else NULL
    s.n = n
    s.C = C
    s.tol = tol
    s.eps = step_eps
    s.b = 0.0
    s.rng = st
    s.steps = 0
    s.record = record
    while True:
        changed = 0
        if examine_all:
            for i in range(n):
                changed += _examine(&s, i, deltas)
        else:
            for i in range(n):
                if 0.0 < s.alpha[i] < C:
                    changed += _examine(&s, i, deltas)
        passes += 1
        if examine_all:
            if changed == 0:
                converged = True
                break
            examine_all = False
        elif changed == 0:
            examine_all = True
        if passes >= max_passes:
            break
    return alpha, s.b, passes, converged, s.steps, np.array(deltas, dtype=np.float64), f


cdef inline double _entropy(long pos, long n) noexcept nogil:
    cdef double p, q
    if pos == 0 or pos == n:
        return 0.0
    p = <double>pos / n
    q = <double>(n - pos) / n
    return -(p * log2(p) + q * log2(q))


def scan_splits(indptr, values, positive, long n_node, long pos_node, long min_leaf):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] posl = np.ascontiguousarray(positive, dtype=np.int64)
    cdef Py_ssize_t n_feat = ptr.shape[0] - 1, j, k, lo, hi
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gain = np.full(n_feat, -1.0)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] split_info = np.zeros(n_feat)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] threshold = np.zeros(n_feat)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] n_left_out = np.zeros(n_feat, dtype=np.int64)
    cdef double base = _entropy(pos_node, n_node), prev, cur, best, g
    cdef long m, left_n, left_pos, pos_nz, right_n, right_pos
    with nogil:
        for j in range(n_feat):
            lo = ptr[j]
            hi = ptr[j + 1]
            m = hi - lo
            if m == 0:
                continue
            pos_nz = 0
            for k in range(lo, hi):
                pos_nz += posl[k]
            left_n = n_node - m
            left_pos = pos_node - pos_nz
            prev = 0.0
            best = -1.0
            for k in range(lo, hi):
                cur = vals[k]
                if left_n > 0 and cur > prev and left_n >= min_leaf and n_node - left_n >= min_leaf:
                    right_n = n_node - left_n
                    right_pos = pos_node - left_pos
                    g = base - (<double>left_n / n_node) * _entropy(left_pos, left_n) \
                        - (<double>right_n / n_node) * _entropy(right_pos, right_n)
                    if g > best:
                        best = g
                        gain[j] = g
                        threshold[j] = 0.5 * (prev + cur)
                        split_info[j] = _entropy(left_n, n_node)
                        n_left_out[j] = left_n
                left_n += 1
                left_pos += posl[k]
                prev = cur
    return gain, split_info, threshold, n_left_out
