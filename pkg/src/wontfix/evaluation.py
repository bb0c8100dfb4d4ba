"""Holdout and k-fold evaluation with per-class and support-weighted metrics."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable

from .classifiers import hyperparameters_for, train
from .corpus import CLASS_ORDER, IssueClass, LabeledCorpus, stratified_folds
from .errors import EmptyEvaluation, TooFewInstances
from .features import Weighting, build_matrix, fit_corpus_vocabulary

VOCAB_MODES = ("train", "full")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int  # actual wontfix, predicted wontfix
    fn: int  # actual wontfix, predicted non_wontfix
    fp: int  # actual non_wontfix, predicted wontfix
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fn + other.fn,
                               self.fp + other.fp, self.tn + other.tn)

    def swapped(self) -> "ConfusionMatrix":
        """The same outcomes with non_wontfix treated as the positive class."""
        return ConfusionMatrix(self.tn, self.fp, self.fn, self.tp)

    @classmethod
    def from_predictions(cls, actual: Iterable[IssueClass],
                         predicted: Iterable[IssueClass]) -> "ConfusionMatrix":
        tp = fn = fp = tn = 0
        for a, p in zip(actual, predicted, strict=True):
            if a is IssueClass.WONTFIX:
                tp, fn = (tp + 1, fn) if p is IssueClass.WONTFIX else (tp, fn + 1)
            else:
                fp, tn = (fp + 1, tn) if p is IssueClass.WONTFIX else (fp, tn + 1)
        return cls(tp, fn, fp, tn)

    def as_rows(self) -> list[list[int]]:
        return [[self.tp, self.fn], [self.fp, self.tn]]


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f_measure: float
    support: int
    undefined_precision: bool = False  # nothing was predicted into this class


@dataclass(frozen=True)
class Metrics:
    per_class: dict[str, ClassMetrics]
    precision: float
    recall: float
    f_measure: float
    accuracy: float


@dataclass(frozen=True)
class EvaluationReport:
    matrix: ConfusionMatrix
    metrics: Metrics
    config: dict[str, Any] = field(default_factory=dict)
    fold_metrics: tuple[Metrics, ...] = ()

    @property
    def weighted(self) -> tuple[float, float, float]:
        return self.metrics.precision, self.metrics.recall, self.metrics.f_measure

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "matrix": {"tp": self.matrix.tp, "fn": self.matrix.fn,
                       "fp": self.matrix.fp, "tn": self.matrix.tn},
            "per_class": {k: asdict(v) for k, v in self.metrics.per_class.items()},
            "weighted": {"precision": self.metrics.precision, "recall": self.metrics.recall,
                         "f_measure": self.metrics.f_measure},
            "accuracy": self.metrics.accuracy,
            "config": self.config,
        }
        if self.fold_metrics:
            out["fold_mean"] = {
                name: sum(getattr(m, name) for m in self.fold_metrics) / len(self.fold_metrics)
                for name in ("precision", "recall", "f_measure", "accuracy")
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_tsv(self) -> str:
        rows = ["class\tprecision\trecall\tf_measure\tsupport"]
        for name, m in self.metrics.per_class.items():
            rows.append(f"{name}\t{m.precision!r}\t{m.recall!r}\t{m.f_measure!r}\t{m.support}")
        m = self.metrics
        rows.append(f"weighted\t{m.precision!r}\t{m.recall!r}\t{m.f_measure!r}\t{self.matrix.total}")
        return "\n".join(rows) + "\n"

    def render(self) -> str:
        """Human-readable table, rounded to three decimals."""
        cm = self.matrix
        lines = [
            "                 predicted",
            "actual           wontfix  non_wontfix",
            f"wontfix        {cm.tp:9d}  {cm.fn:11d}",
            f"non_wontfix    {cm.fp:9d}  {cm.tn:11d}",
            "",
            f"{'class':<14}{'P':>7}{'R':>7}{'F':>7}{'n':>7}",
        ]
        for name, m in self.metrics.per_class.items():
            flag = " *" if m.undefined_precision else ""
            lines.append(f"{name:<14}{m.precision:7.3f}{m.recall:7.3f}{m.f_measure:7.3f}"
                         f"{m.support:7d}{flag}")
        m = self.metrics
        lines.append(f"{'weighted':<14}{m.precision:7.3f}{m.recall:7.3f}{m.f_measure:7.3f}"
                     f"{cm.total:7d}")
        if any(c.undefined_precision for c in m.per_class.values()):
            lines.append("* no instances predicted into this class; precision taken as 0")
        return "\n".join(lines)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _class_metrics(hit: int, missed: int, false_alarm: int) -> ClassMetrics:
    p = _ratio(hit, hit + false_alarm)
    r = _ratio(hit, hit + missed)
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return ClassMetrics(p, r, f, hit + missed, undefined_precision=(hit + false_alarm == 0))


def metrics_from_confusion(cm: ConfusionMatrix) -> Metrics:
    if cm.total == 0:
        raise EmptyEvaluation("no instances were evaluated")
    per = {
        IssueClass.WONTFIX.value: _class_metrics(cm.tp, cm.fn, cm.fp),
        IssueClass.NON_WONTFIX.value: _class_metrics(cm.tn, cm.fp, cm.fn),
    }

    def weighted(name: str) -> float:
        return sum(getattr(m, name) * m.support for m in per.values()) / cm.total

    return Metrics(per, weighted("precision"), weighted("recall"), weighted("f_measure"),
                   (cm.tp + cm.tn) / cm.total)


def _fit_predict(train_corpus: LabeledCorpus, test_corpus: LabeledCorpus, kind: str,
                 params: dict, seed: int, vocab_source: LabeledCorpus,
                 weighting: Weighting) -> ConfusionMatrix:
    vocab = fit_corpus_vocabulary(vocab_source, weighting=weighting)
    model = train(kind, build_matrix(train_corpus, vocab), params, seed=seed)
    test = build_matrix(test_corpus, vocab)
    predicted = [model.predict(col).cls for col in test.columns]
    return ConfusionMatrix.from_predictions(test.labels, predicted)


def _check_mode(vocab_mode: str) -> None:
    if vocab_mode not in VOCAB_MODES:
        raise ValueError(f"vocabulary mode must be one of {VOCAB_MODES}")


def evaluate_holdout(train_corpus: LabeledCorpus, test_corpus: LabeledCorpus, kind: str,
                     hyperparameters: dict | None = None, seed: int = 0,
                     vocab_mode: str = "train",
                     weighting: Weighting = Weighting.RAW) -> EvaluationReport:
    """Fit on ``train_corpus``, score every issue of ``test_corpus``.

    With ``vocab_mode="full"`` the vocabulary (and idf) comes from both
    corpora together, which leaks test document frequencies into training.
    """
    _check_mode(vocab_mode)
    if len(test_corpus) == 0:
        raise EmptyEvaluation("test corpus is empty")
    params = hyperparameters_for(kind, hyperparameters)
    source = train_corpus
    if vocab_mode == "full":
        source = LabeledCorpus(train_corpus.issues + test_corpus.issues,
                               {**train_corpus.class_of, **test_corpus.class_of})
    cm = _fit_predict(train_corpus, test_corpus, kind, params, seed, source, weighting)
    config = {"mode": "holdout", "kind": kind, "hyperparameters": params, "seed": seed,
              "vocab_mode": vocab_mode, "weighting": weighting.value,
              "n_train": len(train_corpus), "n_test": len(test_corpus)}
    return EvaluationReport(cm, metrics_from_confusion(cm), config)


def cross_validate(corpus: LabeledCorpus, k: int = 10, kind: str = "nb",
                   hyperparameters: dict | None = None, seed: int = 0,
                   vocab_mode: str = "train",
                   weighting: Weighting = Weighting.RAW) -> EvaluationReport:
    """Stratified k-fold; fold predictions are pooled into one confusion matrix."""
    _check_mode(vocab_mode)
    if k < 2:
        raise ValueError("k must be at least 2")
    n_w, n_n = corpus.counts()
    for cls, n in zip(CLASS_ORDER, (n_w, n_n)):
        if n < k:
            raise TooFewInstances(f"class {cls.value} has {n} issues, fewer than k={k} folds")
    params = hyperparameters_for(kind, hyperparameters)
    folds = stratified_folds(corpus, k, seed)
    pooled = ConfusionMatrix(0, 0, 0, 0)
    per_fold = []
    for held in folds:
        held_set = set(held)
        train_corpus = corpus.subset([i for i in range(len(corpus)) if i not in held_set])
        test_corpus = corpus.subset(held)
        source = corpus if vocab_mode == "full" else train_corpus
        cm = _fit_predict(train_corpus, test_corpus, kind, params, seed, source, weighting)
        pooled = pooled + cm
        per_fold.append(metrics_from_confusion(cm))
    config = {"mode": "cv", "k": k, "kind": kind, "hyperparameters": params, "seed": seed,
              "vocab_mode": vocab_mode, "weighting": weighting.value, "n": len(corpus)}
    return EvaluationReport(pooled, metrics_from_confusion(pooled), config, tuple(per_fold))
