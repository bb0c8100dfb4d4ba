"""Model files: a JSON header (kind, version, vocabulary hash, hyperparameters)
followed by the vocabulary and a kind-specific body.

Floats go through ``repr`` via the json module, so a round trip is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

from ..errors import FormatError, VersionError
from ..features import SparseVector, Vocabulary, issue_tokens, vectorize
from .base import Prediction
from .naive_bayes import NaiveBayesModel
from .svm import LinearSvmModel
from .tree import DecisionTreeModel, Node

FORMAT = "wontfix-model"
VERSION = 1

Model = Union[NaiveBayesModel, LinearSvmModel, DecisionTreeModel]


@dataclass(frozen=True)
class TrainedModel:
    """A classifier together with the vocabulary its features came from."""

    model: Model
    vocab: Vocabulary
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.model.kind

    def vectorize(self, tokens: Sequence[str]) -> SparseVector:
        return vectorize(tokens, self.vocab)

    def predict(self, v: SparseVector) -> Prediction:
        return self.model.predict(v)

    def predict_issue(self, issue) -> Prediction:
        return self.model.predict(self.vectorize(issue_tokens(issue)))


def _body(model: Model) -> dict:
    if isinstance(model, NaiveBayesModel):
        return {"log_prior": model.log_prior.tolist(),
                "log_likelihood": model.log_likelihood.tolist(),
                "alpha": model.alpha}
    if isinstance(model, LinearSvmModel):
        return {"alpha": model.alpha.tolist(), "b": model.b,
                "w_indices": model.w.indices.tolist(), "w_values": model.w.values.tolist(),
                "C": model.C, "tol": model.tol, "converged": model.converged,
                "passes": model.passes, "steps": model.steps}
    if isinstance(model, DecisionTreeModel):
        return {"cf": model.cf, "min_leaf": model.min_leaf, "pruned": model.pruned,
                "nodes": [[nd.n_wontfix, nd.n_non_wontfix, nd.feature, nd.threshold,
                           nd.left, nd.right] for nd in model.nodes]}
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _model(kind: str, body: dict) -> Model:
    if kind == "nb":
        return NaiveBayesModel(np.asarray(body["log_prior"], dtype=np.float64),
                               np.asarray(body["log_likelihood"], dtype=np.float64),
                               float(body["alpha"]))
    if kind == "smo":
        w = SparseVector(np.asarray(body["w_indices"], dtype=np.int64),
                         np.asarray(body["w_values"], dtype=np.float64))
        return LinearSvmModel(alpha=np.asarray(body["alpha"], dtype=np.float64), b=body["b"],
                              w=w, C=body["C"], tol=body["tol"], converged=body["converged"],
                              passes=body["passes"], steps=body["steps"])
    if kind == "j48":
        nodes = tuple(Node(n_wontfix=a, n_non_wontfix=b, feature=f, threshold=t, left=l, right=r)
                      for a, b, f, t, l, r in body["nodes"])
        return DecisionTreeModel(nodes, body["cf"], body["min_leaf"], body["pruned"])
    raise FormatError(f"unknown model kind {kind!r}")


def dumps_model(trained: TrainedModel) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": trained.kind,
        "vocab_hash": trained.vocab.digest(),
        "hyperparameters": trained.hyperparameters,
        "config": trained.config,
        "vocabulary": trained.vocab.to_dict(),
        "body": _body(trained.model),
    }
    return json.dumps(doc, sort_keys=True, ensure_ascii=False)


def loads_model(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not valid JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise FormatError("not a wontfix model file")
    if doc.get("version") != VERSION:
        raise VersionError(f"model file version {doc.get('version')!r}; this build reads {VERSION}")
    try:
        vocab = Vocabulary.from_dict(doc["vocabulary"])
        if vocab.digest() != doc["vocab_hash"]:
            raise FormatError("vocabulary does not match its recorded hash")
        model = _model(doc["kind"], doc["body"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"corrupt model file: {exc}") from None
    return TrainedModel(model, vocab, doc.get("hyperparameters", {}), doc.get("config", {}))


def save_model(trained: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(dumps_model(trained) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
