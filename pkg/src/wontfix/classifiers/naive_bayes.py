"""Multinomial naive Bayes over tf-idf mass with additive smoothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import IssueClass
from ..features import SparseVector, TermDocumentMatrix
from .base import Prediction, check_two_classes


@dataclass(frozen=True)
class NaiveBayesModel:
    log_prior: np.ndarray  # (2,), order: wontfix, non_wontfix
    log_likelihood: np.ndarray  # (2, |V|)
    alpha: float

    kind = "nb"

    def log_scores(self, v: SparseVector) -> np.ndarray:
        if len(v) == 0:
            return self.log_prior.copy()
        return self.log_prior + self.log_likelihood[:, v.indices] @ v.values

    def predict(self, v: SparseVector) -> Prediction:
        s = self.log_scores(v)
        gap = float(s[0] - s[1])
        if gap > 0:
            cls = IssueClass.WONTFIX
        elif gap < 0:
            cls = IssueClass.NON_WONTFIX
        elif self.log_prior[0] > self.log_prior[1]:
            cls = IssueClass.WONTFIX
        else:
            cls = IssueClass.NON_WONTFIX
        return Prediction(cls, gap)


def train_nb(matrix: TermDocumentMatrix, alpha: float = 1.0) -> NaiveBayesModel:
    if alpha <= 0:
        raise ValueError("smoothing alpha must be positive")
    y = check_two_classes(matrix)
    X = matrix.to_csr()
    n_terms = matrix.n_terms
    log_prior = np.empty(2)
    log_lik = np.empty((2, n_terms))
    for row, mask in enumerate((y > 0, y < 0)):
        mass = np.asarray(X[mask].sum(axis=0)).ravel()
        log_prior[row] = np.log(mask.sum() / len(y))
        log_lik[row] = np.log(alpha + mass) - np.log(alpha * n_terms + mass.sum())
    return NaiveBayesModel(log_prior, log_lik, float(alpha))


def predict_nb(model: NaiveBayesModel, v: SparseVector) -> Prediction:
    return model.predict(v)
