"""Naive Bayes, SMO linear SVM and C4.5 tree behind one train/predict contract."""

from __future__ import annotations

from typing import Any

from ..features import TermDocumentMatrix
from .base import Prediction
from .naive_bayes import NaiveBayesModel, predict_nb, train_nb
from .persistence import TrainedModel, load_model, loads_model, dumps_model, save_model
from .svm import LinearSvmModel, dual_objective, predict_svm, train_smo
from .tree import (DecisionTreeModel, export_tree, feature_ranking, pessimistic_errors,
                   predict_tree, train_j48)

KINDS = ("nb", "smo", "j48")

DEFAULTS: dict[str, dict[str, Any]] = {
    "nb": {"alpha": 1.0},
    "smo": {"C": 1.0, "tol": 1e-3, "step_eps": 1e-12, "max_passes": 10_000},
    "j48": {"cf": 0.25, "min_leaf": 2},
}


def hyperparameters_for(kind: str, overrides: dict[str, Any] | None = None) -> dict[str, Any]:
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; choose from {', '.join(KINDS)}")
    params = dict(DEFAULTS[kind])
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ValueError(f"{kind} has no hyperparameter {key!r}")
        params[key] = value
    return params


def train(kind: str, matrix: TermDocumentMatrix, hyperparameters: dict[str, Any] | None = None,
          seed: int = 0):
    params = hyperparameters_for(kind, hyperparameters)
    if kind == "nb":
        return train_nb(matrix, **params)
    if kind == "smo":
        return train_smo(matrix, seed=seed, **params)
    return train_j48(matrix, **params)


__all__ = [
    "DEFAULTS", "KINDS", "DecisionTreeModel", "LinearSvmModel", "NaiveBayesModel", "Prediction",
    "TrainedModel", "dual_objective", "dumps_model", "export_tree", "feature_ranking",
    "hyperparameters_for", "load_model", "loads_model", "pessimistic_errors", "predict_nb",
    "predict_svm", "predict_tree", "save_model", "train", "train_j48", "train_nb", "train_smo",
]
