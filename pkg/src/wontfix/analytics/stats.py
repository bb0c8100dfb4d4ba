"""Mann-Whitney U and Shapiro-Wilk tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from ..errors import DegenerateVariance, SampleSizeError

EXACT_CUTOFF = 8  # exact enumeration when both samples are at most this size and tie-free


@dataclass(frozen=True)
class StatTestResult:
    statistic: float  # U for the first sample, or W
    p_value: float  # two-sided for Mann-Whitney
    method: str  # "exact" or "normal_approx"
    n1: int
    n2: int = 0
    z: float | None = None
    degenerate: bool = False


# --- Mann-Whitney -----------------------------------------------------------

def _midranks(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average ranks (1-based) and the sizes of the tie groups."""
    order = np.argsort(values, kind="mergesort")
    sorted_v = values[order]
    starts = np.flatnonzero(np.r_[True, sorted_v[1:] != sorted_v[:-1]])
    ends = np.r_[starts[1:], len(values)]
    ranks = np.empty(len(values))
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + 1 + e) / 2.0
    return ranks, ends - starts


def _u_counts(n1: int, n2: int) -> np.ndarray:
    """Number of labelings giving each U = 0 .. n1*n2 (all of them equally likely)."""
    # f[i][j] is the U distribution for i first-sample and j second-sample values;
    # the largest value belongs to either sample: f(i,j) = f(i-1,j) shifted by j, plus f(i,j-1)
    size = n1 * n2 + 1
    f = [[None] * (n2 + 1) for _ in range(n1 + 1)]
    for i in range(n1 + 1):
        for j in range(n2 + 1):
            if i == 0 or j == 0:
                d = np.zeros(size, dtype=np.int64)
                d[0] = 1
            else:
                d = f[i][j - 1].copy()
                d[j:] += f[i - 1][j][:size - j]
            f[i][j] = d
    return f[n1][n2]


def _exact_p(u: float, n1: int, n2: int) -> float:
    counts = _u_counts(n1, n2)
    total = counts.sum()
    k = int(round(u))
    lower = counts[:k + 1].sum() / total
    upper = counts[k:].sum() / total
    return float(min(1.0, 2.0 * min(lower, upper)))


def mann_whitney(x: Sequence[float], y: Sequence[float], method: str = "auto") -> StatTestResult:
    """Two-sided Mann-Whitney U test; U counts pairs with x above y (ties count half).

    ``method`` is "auto", "exact" or "normal". Exact enumeration needs tie-free data.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n1, n2 = len(x), len(y)
    if n1 < 1 or n2 < 1:
        raise SampleSizeError("both samples need at least one value")
    pooled = np.concatenate([x, y])
    ranks, ties = _midranks(pooled)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    has_ties = bool((ties > 1).any())
    if method == "auto":
        method = "exact" if (n1 <= EXACT_CUTOFF and n2 <= EXACT_CUTOFF and not has_ties) else "normal"
    if method == "exact":
        if has_ties:
            raise ValueError("exact enumeration is only valid without ties")
        return StatTestResult(u, _exact_p(u, n1, n2), "exact", n1, n2)
    if method != "normal":
        raise ValueError(f"unknown method {method!r}")

    n = n1 + n2
    tie_term = float((ties ** 3 - ties).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0.0:
        # every pooled value identical: no evidence either way
        return StatTestResult(u, 1.0, "normal_approx", n1, n2, z=0.0, degenerate=True)
    dev = abs(u - n1 * n2 / 2.0)
    z = max(dev - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * float(ndtr(-z)))
    return StatTestResult(u, p, "normal_approx", n1, n2, z=z)


# --- Shapiro-Wilk (Royston's AS R94 approximation) ----------------------------

_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coef: Sequence[float], x: float) -> float:
    out = 0.0
    for c in reversed(coef):
        out = out * x + c
    return out


def _sw_coefficients(n: int) -> np.ndarray:
    """Antisymmetric weight vector a (ascending order statistics), sum(a**2) = 1."""
    half = n // 2
    if n == 3:
        a_half = np.array([math.sqrt(0.5)])
    else:
        i = np.arange(1, half + 1)
        m = ndtri((i - 0.375) / (n + 0.25))  # negative: lower order statistics
        summ2 = 2.0 * float(m @ m)
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) - m[0] / ssumm2
        if n > 5:
            a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
            fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
            a_half = -m / fac
            a_half[1] = a2
        else:
            fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
            a_half = -m / fac
        a_half[0] = a1
    a = np.zeros(n)
    a[n - half:] = a_half[::-1]
    a[:half] = -a_half
    return a


def shapiro_wilk(x: Sequence[float]) -> StatTestResult:
    """Shapiro-Wilk W and its p-value, valid for 3 <= n <= 5000."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = len(x)
    if not 3 <= n <= 5000:
        raise SampleSizeError(f"Shapiro-Wilk needs 3..5000 values, got {n}")
    rng = x[-1] - x[0]
    if not rng > 0:
        raise DegenerateVariance("constant sample")
    a = _sw_coefficients(n)
    # W as the squared correlation of data and weights; centring and scaling by the
    # range first keeps it invariant under affine maps
    xs = (x - x.mean()) / rng
    ac = a - a.mean()
    w = float((ac @ xs) ** 2 / ((ac @ ac) * (xs @ xs)))
    w = min(w, 1.0)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return StatTestResult(w, min(max(p, 0.0), 1.0), "normal_approx", n)
    w1 = 1.0 - w
    if w1 <= 0.0:
        return StatTestResult(w, 1.0, "normal_approx", n)
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return StatTestResult(w, 1e-99, "normal_approx", n)
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        mu = _poly(_C5, ln)
        sigma = math.exp(_poly(_C6, ln))
    z = (y - mu) / sigma
    return StatTestResult(w, float(ndtr(-z)), "normal_approx", n, z=z)
