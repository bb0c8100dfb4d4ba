"""Discussion metrics, rank and normality tests, and the comparison tables built on them."""

from .metrics import METRIC_NAMES, DiscussionMetrics, compute_metrics
from .stats import EXACT_CUTOFF, StatTestResult, mann_whitney, shapiro_wilk
from .tables import (ALPHA, BUCKETS, CATEGORIES, Cooccurrence, PairTest, actor_bucket, band,
                     bucket_by_actors, closing_categories, compare_categories, cooccurrence,
                     pair_tests_tsv, summarize, summarize_corpus)

__all__ = [
    "ALPHA", "BUCKETS", "CATEGORIES", "Cooccurrence", "DiscussionMetrics", "EXACT_CUTOFF",
    "METRIC_NAMES", "PairTest", "StatTestResult", "actor_bucket", "band", "bucket_by_actors",
    "closing_categories", "compare_categories", "compute_metrics", "cooccurrence",
    "mann_whitney", "pair_tests_tsv", "shapiro_wilk", "summarize", "summarize_corpus",
]
