"""Category and actor-bucket comparisons, motivation co-occurrence, summaries."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from ..corpus import IssueRecord, LabeledCorpus
from ..errors import MissingAnnotations
from .metrics import METRIC_NAMES, DiscussionMetrics, compute_metrics
from .stats import StatTestResult, mann_whitney

ALPHA = 0.05

# display name -> closing group; None selects every annotated issue
CATEGORIES: dict[str, str | None] = {
    "All": None,
    "Bug": "bug",
    "Not a bug": "not_a_bug",
    "Feature request/enhancement": "feature_request_enhancement",
    "Change": "change",
}

BUCKETS = ("x<=2", "3<=x<=4", "x>=5")


def band(p: float) -> str:
    if p < ALPHA:
        return "<0.05"
    if p <= 0.1:
        return "[0.05,0.1]"
    return ">0.1"


def actor_bucket(n_actors: int) -> str:
    if n_actors <= 2:
        return BUCKETS[0]
    if n_actors <= 4:
        return BUCKETS[1]
    return BUCKETS[2]


def _require_annotations(corpus: LabeledCorpus) -> None:
    if not corpus.annotations:
        raise MissingAnnotations("this analysis needs closing-motivation annotations "
                                 "(an \"annotations\" object on each analysed issue)")


def _metrics_of(corpus: LabeledCorpus, count_opening_post: bool) -> dict[str, DiscussionMetrics]:
    return {i.id: compute_metrics(i, count_opening_post) for i in corpus.issues}


def _category_members(corpus: LabeledCorpus, group: str | None) -> list[IssueRecord]:
    ann = corpus.annotations
    return [i for i in corpus.issues
            if i.id in ann and (group is None or group in ann[i.id].closing_groups)]


@dataclass(frozen=True)
class PairTest:
    metric: str
    first: str
    second: str
    result: StatTestResult | None  # None when either side is empty

    @property
    def band(self) -> str:
        return band(self.result.p_value) if self.result is not None else "n/a"


def compare_categories(corpus: LabeledCorpus, metrics: Sequence[str] = METRIC_NAMES,
                       count_opening_post: bool = False) -> list[PairTest]:
    """Mann-Whitney test of every metric across every pair of closing categories."""
    _require_annotations(corpus)
    unknown = set(metrics) - set(METRIC_NAMES)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    values = _metrics_of(corpus, count_opening_post)
    members = {name: [values[i.id] for i in _category_members(corpus, group)]
               for name, group in CATEGORIES.items()}
    out = []
    for metric in metrics:
        for a, b in combinations(CATEGORIES, 2):
            xs = [m[metric] for m in members[a]]
            ys = [m[metric] for m in members[b]]
            result = mann_whitney(xs, ys) if xs and ys else None
            out.append(PairTest(metric, a, b, result))
    return out


def bucket_by_actors(corpus: LabeledCorpus, metric: str = "time_to_close",
                     category: str = "All",
                     count_opening_post: bool = False) -> tuple[dict[str, list[float]], list[PairTest]]:
    """Split issues into actor-count buckets and test the metric between buckets."""
    if metric not in METRIC_NAMES:
        raise ValueError(f"unknown metric {metric!r}")
    if category == "All" and not corpus.annotations:
        issues = list(corpus.issues)  # no annotations needed for the whole corpus
    else:
        _require_annotations(corpus)
        issues = _category_members(corpus, CATEGORIES[category])
    buckets: dict[str, list[float]] = {b: [] for b in BUCKETS}
    for issue in issues:
        m = compute_metrics(issue, count_opening_post)
        buckets[actor_bucket(m.n_actors)].append(m[metric])
    tests = []
    for a, b in combinations(BUCKETS, 2):
        result = mann_whitney(buckets[a], buckets[b]) if buckets[a] and buckets[b] else None
        tests.append(PairTest(metric, a, b, result))
    return buckets, tests


@dataclass(frozen=True)
class Cooccurrence:
    counts: dict[tuple[str, str], int]  # (opening, closing) -> issues carrying both
    opening_totals: dict[str, int]  # issues per opening motivation

    def share(self, opening: str, closing: str) -> float:
        total = self.opening_totals.get(opening, 0)
        return self.counts.get((opening, closing), 0) / total if total else 0.0

    def to_tsv(self) -> str:
        rows = ["opening\tclosing\tcount\trow_share"]
        for (o, c), k in sorted(self.counts.items()):
            rows.append(f"{o}\t{c}\t{k}\t{self.share(o, c)!r}")
        return "\n".join(rows) + "\n"


def cooccurrence(corpus: LabeledCorpus) -> Cooccurrence:
    counts: Counter = Counter()
    totals: Counter = Counter()
    for ann in corpus.annotations.values():
        for o in ann.opening:
            totals[o] += 1
            for c in ann.closing:
                counts[(o, c)] += 1
    return Cooccurrence(dict(counts), dict(totals))


def summarize(values: Sequence[float]) -> dict[str, float]:
    """Min, quartiles, mean and max of a distribution."""
    if len(values) == 0:
        return {}
    v = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"n": float(len(v)), "min": float(v.min()), "q1": float(q1), "median": float(med),
            "mean": float(v.mean()), "q3": float(q3), "max": float(v.max())}


def summarize_corpus(corpus: LabeledCorpus, count_opening_post: bool = False,
                     group_by: Callable[[IssueRecord], str] | None = None) -> dict:
    """Per-metric summaries, optionally split by ``group_by`` (e.g. the issue's class)."""
    groups: dict[str, list[DiscussionMetrics]] = {}
    for issue in corpus.issues:
        key = group_by(issue) if group_by else "all"
        groups.setdefault(key, []).append(compute_metrics(issue, count_opening_post))
    return {g: {name: summarize([m[name] for m in ms]) for name in METRIC_NAMES}
            for g, ms in sorted(groups.items())}


def pair_tests_tsv(tests: Sequence[PairTest]) -> str:
    rows = ["metric\tfirst\tsecond\tU\tp_value\tband\tmethod"]
    for t in tests:
        if t.result is None:
            rows.append(f"{t.metric}\t{t.first}\t{t.second}\t\t\tn/a\t")
        else:
            r = t.result
            rows.append(f"{t.metric}\t{t.first}\t{t.second}\t{r.statistic!r}\t{r.p_value!r}"
                        f"\t{t.band}\t{r.method}")
    return "\n".join(rows) + "\n"


def closing_categories(corpus: LabeledCorpus) -> dict[str, int]:
    """Annotated issue count per closing category."""
    return {name: len(_category_members(corpus, group)) for name, group in CATEGORIES.items()}
