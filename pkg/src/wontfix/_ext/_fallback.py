"""Pure-Python versions of the hot kernels.

These mirror ``_kernels.pyx`` statement for statement (same arithmetic
order, same pseudo-random stream) so both backends produce identical
models. Keep them in sync.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


class _XorShift:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = (seed * 0x9E3779B97F4A7C15 + 0x2545F4914F6CDD1D) & _MASK or 1

    def below(self, n: int) -> int:
        x = self.state
        x ^= (x << 13) & _MASK
        x ^= x >> 7
        x ^= (x << 17) & _MASK
        self.state = x
        return x % n


def smo_solve(K, y, C, tol, step_eps, max_passes, seed, record):
    """Platt's SMO on a dense Gram matrix.

    Returns (alpha, b, passes, converged, steps, deltas) where ``deltas`` holds
    the dual-objective increase of every accepted step when ``record`` is set.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    alpha = [0.0] * n
    f = [0.0] * n  # f[i] = sum_j alpha_j y_j K[i, j]
    yl = y.tolist()
    Kl = K.tolist()
    b = 0.0
    rng = _XorShift(seed)
    deltas = []
    state = {"b": b, "steps": 0}

    def take_step(i1, i2):
        if i1 == i2:
            return 0
        b = state["b"]
        a1 = alpha[i1]
        a2 = alpha[i2]
        y1 = yl[i1]
        y2 = yl[i2]
        E1 = f[i1] - b - y1
        E2 = f[i2] - b - y2
        s = y1 * y2
        if y1 != y2:
            L = max(0.0, a2 - a1)
            H = min(C, C + a2 - a1)
        else:
            L = max(0.0, a1 + a2 - C)
            H = min(C, a1 + a2)
        if L >= H:
            return 0
        row1 = Kl[i1]
        row2 = Kl[i2]
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
            g1 = y1 * (E1 + b) - a1 * k11 - s * a2 * k12
            g2 = y2 * (E2 + b) - s * a1 * k12 - a2 * k22
            L1 = a1 + s * (a2 - L)
            H1 = a1 + s * (a2 - H)
            Lobj = L1 * g1 + L * g2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12
            Hobj = H1 * g1 + H * g2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12
            if Lobj < Hobj - step_eps:
                a2n = L
            elif Lobj > Hobj + step_eps:
                a2n = H
            else:
                a2n = a2
        if a2n < step_eps:
            a2n = 0.0
        elif a2n > C - step_eps:
            a2n = C
        if abs(a2n - a2) <= step_eps:
            return 0
        a1n = a1 + s * (a2 - a2n)
        if a1n < step_eps:
            a2n += s * a1n
            a1n = 0.0
        elif a1n > C - step_eps:
            a2n += s * (a1n - C)
            a1n = C
        if a2n < 0.0:
            a2n = 0.0
        elif a2n > C:
            a2n = C
        d1 = a1n - a1
        d2 = a2n - a2
        if record:
            gain = (d1 + d2 - y1 * f[i1] * d1 - y2 * f[i2] * d2
                    - 0.5 * (d1 * d1 * k11 + d2 * d2 * k22 + 2.0 * s * d1 * d2 * k12))
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
            f[k] += t1 * row1[k] + t2 * row2[k]
        alpha[i1] = a1n
        alpha[i2] = a2n
        state["b"] = b
        state["steps"] += 1
        return 1

    def examine(i2):
        b = state["b"]
        y2 = yl[i2]
        a2 = alpha[i2]
        E2 = f[i2] - b - y2
        r2 = E2 * y2
        if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0.0)):
            return 0
        best = -1
        best_gap = -1.0
        n_free = 0
        for k in range(n):
            if 0.0 < alpha[k] < C:
                n_free += 1
                gap = abs(f[k] - b - yl[k] - E2)
                if gap > best_gap:
                    best_gap = gap
                    best = k
        if n_free > 1 and best >= 0 and take_step(best, i2):
            return 1
        start = rng.below(n)
        for off in range(n):
            k = (start + off) % n
            if 0.0 < alpha[k] < C and take_step(k, i2):
                return 1
        start = rng.below(n)
        for off in range(n):
            k = (start + off) % n
            if take_step(k, i2):
                return 1
        return 0

    passes = 0
    examine_all = True
    converged = False
    while True:
        changed = 0
        if examine_all:
            for i in range(n):
                changed += examine(i)
        else:
            for i in range(n):
                if 0.0 < alpha[i] < C:
                    changed += examine(i)
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
    return (np.array(alpha), state["b"], passes, converged, state["steps"],
            np.array(deltas, dtype=np.float64), np.array(f))


def _entropy(pos, n):
    if pos == 0 or pos == n:
        return 0.0
    p = pos / n
    q = (n - pos) / n
    return -(p * math.log2(p) + q * math.log2(q))


def scan_splits(indptr, values, positive, n_node, pos_node, min_leaf):
    """Best information-gain threshold per feature at one tree node.

    ``values``/``positive`` are the node's nonzero entries grouped by feature
    (CSC order) and sorted ascending within each feature; absent entries are
    zeros. Returns arrays (gain, split_info, threshold, n_left); a feature with
    no admissible threshold gets gain = -1.
    """
    n_feat = len(indptr) - 1
    gain = np.full(n_feat, -1.0)
    split_info = np.zeros(n_feat)
    threshold = np.zeros(n_feat)
    n_left_out = np.zeros(n_feat, dtype=np.int64)
    base = _entropy(pos_node, n_node)
    vals = values.tolist()
    posl = positive.tolist()
    ptr = indptr.tolist()
    for j in range(n_feat):
        lo = ptr[j]
        hi = ptr[j + 1]
        m = hi - lo
        if m == 0:
            continue
        zeros = n_node - m
        pos_nz = 0
        for k in range(lo, hi):
            pos_nz += posl[k]
        left_n = zeros
        left_pos = pos_node - pos_nz
        prev = 0.0
        best = -1.0
        for k in range(lo, hi):
            # candidate cut between ``prev`` (largest value on the left) and cur
            cur = vals[k]
            if left_n > 0 and cur > prev and left_n >= min_leaf and n_node - left_n >= min_leaf:
                right_n = n_node - left_n
                right_pos = pos_node - left_pos
                g = base - (left_n / n_node) * _entropy(left_pos, left_n) \
                    - (right_n / n_node) * _entropy(right_pos, right_n)
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
