import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from conftest import make_issue
from wontfix.analytics import (BUCKETS, CATEGORIES, METRIC_NAMES, actor_bucket, band,
                               bucket_by_actors, compare_categories, compute_metrics,
                               cooccurrence, mann_whitney, pair_tests_tsv, shapiro_wilk,
                               summarize, summarize_corpus)
from wontfix.corpus import LabeledCorpus, TaxonomyAnnotation
from wontfix.errors import (DegenerateVariance, MissingAnnotations, MissingCloseTime,
                            SampleSizeError)
from wontfix.synthetic import generate_corpus

# --- discussion metrics -----------------------------------------------------------


def test_metrics_by_hand():
    issue = make_issue(1, body="x" * 40, close_after_days=3.0,
                       comments=[("A", 2, "aa"), ("A", 4, "aaaa"), ("A", 6, ""),
                                 ("B", 12, "bbbbbb"), ("C", 24, "cccccccc")])
    m = compute_metrics(issue)
    assert (m.n_actors, m.max_author_percentage, m.major_authors, m.minor_authors) == (3, 0.6, 1, 2)
    assert m.n_comments == 5 and m.mean_comment_size == 4.0
    assert m.description_length == 40
    assert m.time_to_close == 3.0 and m.time_to_discuss == 1.0
    assert m["n_actors"] == 3
    with pytest.raises(KeyError):
        m["nope"]


def test_exactly_one_third_is_neither():
    issue = make_issue(1, comments=["A", "B", "C", "A", "B", "C"])
    m = compute_metrics(issue)
    assert (m.major_authors, m.minor_authors) == (0, 0)


def test_opening_post_counts_when_asked():
    issue = make_issue(1, author="A", body="abcd", comments=[("A", 1, "xx"), ("B", 2, "yy")])
    m = compute_metrics(issue, count_opening_post=True)
    assert m.n_comments == 3 and m.max_author_percentage == pytest.approx(2 / 3)
    assert (m.major_authors, m.minor_authors) == (1, 0)  # B wrote exactly a third
    assert m.mean_comment_size == pytest.approx(8 / 3)


def test_no_comments():
    m = compute_metrics(make_issue(1, comments=()))
    assert (m.n_actors, m.n_comments, m.major_authors, m.minor_authors) == (0, 0, 0, 0)
    assert m.max_author_percentage == 0.0 and m.mean_comment_size == 0.0
    assert m.time_to_discuss == 0.0


def test_missing_close_time():
    issue = make_issue(1, state="open")
    with pytest.raises(MissingCloseTime):
        compute_metrics(issue)
    assert compute_metrics(issue, require_close=False).time_to_close is None


AUTHORS = st.lists(st.tuples(st.sampled_from("ABCDEFG"), st.floats(0, 500),
                             st.text("xyz", max_size=30)), max_size=25)


@settings(max_examples=1000, deadline=None)
@given(AUTHORS, st.booleans(), st.floats(0.0, 100.0))
def test_metric_invariants(comments, opening, close_days):
    comments = sorted(comments, key=lambda c: c[1])
    issue = make_issue(1, comments=comments, close_after_days=close_days)
    m = compute_metrics(issue, count_opening_post=opening)
    assert m.n_actors <= m.n_comments
    assert m.major_authors + m.minor_authors <= m.n_actors
    assert m.major_authors <= 2
    if m.n_comments:
        assert 1 / m.n_actors - 1e-12 <= m.max_author_percentage <= 1.0
        assert (m.major_authors >= 1) == (m.max_author_percentage > 1 / 3)
    assert m.time_to_close >= 0 and m.time_to_discuss >= 0


# --- Mann-Whitney ---------------------------------------------------------------


def test_mann_whitney_fully_separated():
    r = mann_whitney([1, 2, 3], [4, 5, 6])
    assert r.statistic == 0.0 and r.method == "exact"
    assert r.p_value == pytest.approx(0.1, abs=1e-12)


def _brute_force_p(x, y):
    pooled = list(x) + list(y)
    n1 = len(x)
    u_obs = sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in x for b in y)
    us = []
    for idx in combinations(range(len(pooled)), n1):
        xs = [pooled[i] for i in idx]
        ys = [pooled[i] for i in range(len(pooled)) if i not in idx]
        us.append(sum(1.0 if a > b else 0.0 for a in xs for b in ys))
    us = np.array(us)
    return u_obs, min(1.0, 2 * min((us <= u_obs).mean(), (us >= u_obs).mean()))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 10_000), min_size=2, max_size=14, unique=True),
       st.integers(1, 7))
def test_exact_matches_enumeration(values, n1):
    n1 = min(n1, len(values) - 1)
    x, y = values[:n1], values[n1:]
    if len(y) > 8:
        y = y[:8]
    u, p = _brute_force_p(x, y)
    r = mann_whitney(x, y, method="exact")
    assert r.statistic == u
    assert r.p_value == pytest.approx(p, abs=1e-12)


SAMPLE = st.lists(st.integers(-50, 50), min_size=1, max_size=25)


@settings(max_examples=300, deadline=None)
@given(SAMPLE, SAMPLE)
def test_symmetry_and_u_sum(x, y):
    a, b = mann_whitney(x, y), mann_whitney(y, x)
    assert a.p_value == pytest.approx(b.p_value, abs=1e-12)
    assert a.statistic + b.statistic == pytest.approx(len(x) * len(y))
    assert 0.0 <= a.p_value <= 1.0


@settings(max_examples=200, deadline=None)
@given(SAMPLE, SAMPLE)
def test_monotone_transform_invariance(x, y):
    a = mann_whitney(x, y)
    b = mann_whitney([math.exp(v / 10) for v in x], [math.exp(v / 10) for v in y])
    assert a.statistic == b.statistic
    assert a.p_value == pytest.approx(b.p_value, abs=1e-12)


def test_normal_approx_matches_scipy_with_ties():
    x, y = [1.5, 2, 2, 7, 9, 3], [4, 4, 5, 6, 8, 10, 1]
    r = mann_whitney(x, y)
    ref = sps.mannwhitneyu(x, y, method="asymptotic")
    assert r.method == "normal_approx"
    assert r.statistic == ref.statistic
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)


def test_all_identical_is_degenerate():
    r = mann_whitney([3, 3, 3], [3, 3])
    assert r.degenerate and r.p_value == 1.0


def test_mann_whitney_errors():
    with pytest.raises(SampleSizeError):
        mann_whitney([], [1.0])
    with pytest.raises(ValueError):
        mann_whitney([1, 1], [1, 2], method="exact")
    with pytest.raises(ValueError):
        mann_whitney([1], [2], method="bootstrap")


# --- Shapiro-Wilk ---------------------------------------------------------------

FROZEN_SW = [
    ([1.711, 3.8, 1.311], 0.8669320915059389, 0.28685546652651595),
    ([2.516, 2.829, 4.617, 2.708, 1.224], 0.9249151788619471, 0.5621300213434324),
    ([2.974, 1.477, 0.777, 2.23, 0.214, 1.133, 0.387, 3.114, 0.879, 2.775, 2.473],
     0.9134385806408145, 0.26771286382587967),
    ([1.414, 2.157, 3.526, 0.95, 0.281, 2.445, 4.172, 2.615, 3.23, 2.592, 0.268, 1.364],
     0.9602139919594758, 0.7868808599033786),
]


@pytest.mark.parametrize("x,w,p", FROZEN_SW)
def test_shapiro_frozen_values(x, w, p):
    r = shapiro_wilk(x)
    assert r.statistic == pytest.approx(w, abs=1e-6)
    assert r.p_value == pytest.approx(p, abs=1e-5)


@pytest.mark.parametrize("n,seed", [(30, 1), (200, 2), (1000, 3), (5000, 4)])
def test_shapiro_agrees_with_scipy(n, seed):
    x = np.random.default_rng(seed).gamma(2.0, 1.0, n)
    r, ref = shapiro_wilk(x), sps.shapiro(x)
    assert r.statistic == pytest.approx(ref.statistic, abs=1e-6)
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-3, abs=1e-8)


def test_shapiro_symmetric_triplet():
    assert shapiro_wilk([-1, 0, 1]).statistic == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=60),
       st.floats(0.01, 100), st.floats(-100, 100))
def test_shapiro_affine_invariance(x, scale, shift):
    if np.ptp(x) < 1e-6 * max(1.0, np.abs(x).max()):
        return
    a = shapiro_wilk(x).statistic
    b = shapiro_wilk([scale * v + shift for v in x]).statistic
    assert 0.0 < a <= 1.0
    assert a == pytest.approx(b, abs=1e-9)


def test_outlier_lowers_w():
    x = list(sps.norm.ppf((np.arange(1, 31) - 0.375) / 30.25))
    base = shapiro_wilk(x)
    worse = shapiro_wilk(x[:-1] + [25.0])
    assert worse.statistic < base.statistic and worse.p_value < base.p_value


def test_shapiro_errors():
    with pytest.raises(SampleSizeError):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(SampleSizeError):
        shapiro_wilk(np.arange(5001.0))
    with pytest.raises(DegenerateVariance):
        shapiro_wilk([2.0, 2.0, 2.0, 2.0])


# --- category comparisons, buckets, co-occurrence -----------------------------------


def test_bands_and_buckets():
    assert [band(p) for p in (0.01, 0.05, 0.1, 0.2)] == ["<0.05", "[0.05,0.1]", "[0.05,0.1]", ">0.1"]
    assert [actor_bucket(k) for k in (0, 2, 3, 4, 5, 9)] == [BUCKETS[0], BUCKETS[0], BUCKETS[1],
                                                             BUCKETS[1], BUCKETS[2], BUCKETS[2]]


def test_category_grid_shape():
    corpus = generate_corpus(300, seed=6, annotate=True)
    tests = compare_categories(corpus)
    assert len(tests) == len(METRIC_NAMES) * 10
    assert {(t.first, t.second) for t in tests} == set(combinations(CATEGORIES, 2))
    tsv = pair_tests_tsv(tests).splitlines()
    assert len(tsv) == 1 + len(tests)


def test_planted_time_to_close_shift_is_flagged():
    def close_days(rng, n_actors, groups):
        return rng.uniform(30, 60) if "bug" in groups else rng.uniform(0, 20)

    corpus = generate_corpus(600, seed=8, annotate=True, close_days=close_days)
    tests = {(t.metric, t.first, t.second): t for t in compare_categories(corpus)}
    assert tests[("time_to_close", "Bug", "Change")].band == "<0.05"
    assert tests[("time_to_close", "Bug", "Not a bug")].band == "<0.05"


def test_same_category_twice_gives_p_one():
    corpus = generate_corpus(200, seed=1, annotate=True)
    xs = [compute_metrics(i).time_to_close for i in corpus.issues if i.id in corpus.annotations]
    assert mann_whitney(xs, xs).p_value == 1.0


def test_missing_annotations():
    corpus = generate_corpus(50, seed=1)
    with pytest.raises(MissingAnnotations):
        compare_categories(corpus)
    with pytest.raises(MissingAnnotations):
        bucket_by_actors(corpus, category="Bug")


def test_buckets_partition_issues():
    corpus = generate_corpus(300, seed=2)
    buckets, tests = bucket_by_actors(corpus, "time_to_close")
    assert sum(len(v) for v in buckets.values()) == len(corpus)
    assert len(tests) == 3
    four = make_issue(1, comments=["a", "b", "c", "d"])
    c = LabeledCorpus.from_issues([four])
    assert [len(v) for v in bucket_by_actors(c)[0].values()] == [0, 1, 0]


def test_cooccurrence_share():
    issues, anns = [], {}
    for k in range(164):
        issue = make_issue(k, labels=("wontfix",))
        closing = "not_relevant_request" if k < 146 else "not_a_bug"
        anns[issue.id] = TaxonomyAnnotation(frozenset({"feature_request"}), frozenset({closing}))
        issues.append(issue)
    co = cooccurrence(LabeledCorpus.from_issues(issues, anns))
    assert co.opening_totals["feature_request"] == 164
    assert co.share("feature_request", "not_relevant_request") == pytest.approx(0.89, abs=0.005)
    assert "feature_request\tnot_relevant_request\t146\t" in co.to_tsv()


def test_cooccurrence_rows_cover_openings():
    co = cooccurrence(generate_corpus(300, seed=3, annotate=True))
    for o, total in co.opening_totals.items():
        assert sum(k for (oo, _), k in co.counts.items() if oo == o) >= total


def test_summaries():
    s = summarize([1, 2, 3, 4])
    assert (s["min"], s["median"], s["mean"], s["max"]) == (1, 2.5, 2.5, 4)
    assert summarize([]) == {}
    corpus = generate_corpus(60, seed=4)
    by_class = summarize_corpus(corpus, group_by=lambda i: corpus.class_of[i.id].value)
    assert set(by_class) == {"wontfix", "non_wontfix"}
    assert set(by_class["wontfix"]) == set(METRIC_NAMES)


# --- normal approximation against enumeration -------------------------------------


def _rank_sum_counts(values, n1):
    """Labelings of the pooled sample by doubled first-sample midrank sum (subset-sum DP)."""
    order = np.sort(np.asarray(values, dtype=float))
    ranks = sps.rankdata(order)
    doubled = (2 * ranks).astype(int)
    top = int(doubled.sum())
    table = np.zeros((n1 + 1, top + 1), dtype=object)
    table[0, 0] = 1
    for d in doubled:
        table[1:, d:] = table[1:, d:] + table[:-1, :top + 1 - d]
    return table[n1]


def _enumerated_p(x, y):
    counts = _rank_sum_counts(list(x) + list(y), len(x))
    ranks = sps.rankdata(list(x) + list(y))
    obs = int(round(2 * ranks[:len(x)].sum()))
    total = sum(counts)
    lower = sum(counts[:obs + 1]) / total
    upper = sum(counts[obs:]) / total
    return min(1.0, 2 * min(lower, upper))


def test_tied_fifteen_versus_fifteen():
    rng = np.random.default_rng(15)
    for _ in range(5):
        x = rng.integers(1, 5, 15)
        y = rng.integers(2, 6, 15)
        r = mann_whitney(x, y)
        assert r.method == "normal_approx"
        assert abs(r.p_value - _enumerated_p(x, y)) <= 0.02


def _with_u(n, u):
    """n distinct values beating exactly u of 0..n-1 in total."""
    return np.array([min(n, max(0, u - n * i)) - 0.5 + 1e-3 * i for i in range(n)])


def _normal_gap(n):
    worst = (0.0, None)
    for u in range(n * n + 1):
        x = _with_u(n, u)
        y = np.arange(n, dtype=float)
        exact = mann_whitney(x, y, method="exact")
        approx = mann_whitney(x, y, method="normal")
        assert exact.statistic == approx.statistic == u
        worst = max(worst, (abs(exact.p_value - approx.p_value), u))
    return worst


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_normal_within_two_points_of_exact(n):
    assert _normal_gap(n)[0] <= 0.02


def test_normal_matches_scipy_asymptotic():
    for n, u in ((5, 17), (6, 24), (8, 40)):
        x, y = _with_u(n, u), np.arange(n, dtype=float)
        ref = sps.mannwhitneyu(x, y, method="asymptotic")
        assert mann_whitney(x, y, method="normal").p_value == pytest.approx(ref.pvalue, rel=1e-12)
