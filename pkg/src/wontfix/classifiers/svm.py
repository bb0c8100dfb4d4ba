"""Soft-margin linear SVM trained with sequential minimal optimization.

The dual is solved on a dense Gram matrix by the compiled kernel (or its
pure-Python twin); the primal weight vector is materialized afterwards.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .. import _ext
from ..corpus import IssueClass
from ..errors import NonConvergenceWarning
from ..features import SparseVector, TermDocumentMatrix
from .base import Prediction, check_two_classes


@dataclass(frozen=True)
class LinearSvmModel:
    alpha: np.ndarray
    b: float
    w: SparseVector
    C: float
    tol: float
    converged: bool
    passes: int
    steps: int
    # dual-objective gain of every accepted step; only filled when recording
    objective_deltas: np.ndarray = field(default_factory=lambda: np.zeros(0), compare=False)

    kind = "smo"

    def decision(self, v: SparseVector) -> float:
        if len(v) == 0 or len(self.w) == 0:
            return -self.b
        common, iv, iw = np.intersect1d(v.indices, self.w.indices, assume_unique=True,
                                        return_indices=True)
        return float(v.values[iv] @ self.w.values[iw]) - self.b

    def predict(self, v: SparseVector) -> Prediction:
        score = self.decision(v)
        return Prediction(IssueClass.WONTFIX if score > 0 else IssueClass.NON_WONTFIX, score)


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def _kkt_ok(alpha, y, f, b, C, tol) -> bool:
    free = (alpha > 0) & (alpha < C)
    return bool(np.all(np.abs(y[free] * (f[free] - b - y[free])) <= tol))


def train_smo(matrix: TermDocumentMatrix, labels=None, C: float = 1.0, tol: float = 1e-3,
              step_eps: float = 1e-12, max_passes: int = 10_000, seed: int = 0,
              record: bool = False) -> LinearSvmModel:
    y = check_two_classes(matrix if labels is None else matrix.with_labels(labels))
    X = matrix.to_csr()
    K = (X @ X.T).toarray()
    alpha, b, passes, converged, steps, deltas, f = _ext.smo_solve(
        K, y, float(C), float(tol), float(step_eps), int(max_passes), int(seed), bool(record))
    if not converged:
        warnings.warn(f"SMO stopped after {passes} passes without meeting KKT at tol={tol}",
                      NonConvergenceWarning, stacklevel=2)

    free = (alpha > 0) & (alpha < C)
    if free.any():
        averaged = float(np.mean(f[free] - y[free]))
        # the averaged bias can nudge a free example past tol; keep the iterate's b then
        if _kkt_ok(alpha, y, f, averaged, C, tol) or not converged:
            b = averaged

    coef = X.T @ (alpha * y)
    nz = np.flatnonzero(coef)
    w = SparseVector(nz.astype(np.int64), coef[nz].astype(np.float64))
    return LinearSvmModel(alpha=alpha, b=float(b), w=w, C=float(C), tol=float(tol),
                          converged=bool(converged), passes=int(passes), steps=int(steps),
                          objective_deltas=deltas)


def predict_svm(model: LinearSvmModel, v: SparseVector) -> Prediction:
    return model.predict(v)
