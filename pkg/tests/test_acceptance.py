"""Exit criteria. Each test appends one PASS/FAIL line to the terminal summary."""

import time
from contextlib import contextmanager
from itertools import combinations

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, DATA, dense_matrix, make_corpus, make_issue
from wontfix.analytics import compute_metrics, mann_whitney, shapiro_wilk
from wontfix.classifiers import (dual_objective, export_tree, feature_ranking, train_j48,
                                 train_smo)
from wontfix.corpus import IssueClass, stratified_folds, stratified_split
from wontfix.evaluation import ConfusionMatrix, evaluate_holdout, metrics_from_confusion
from wontfix.features import build_matrix, fit_corpus_vocabulary, fit_vocabulary, vectorize
from wontfix.synthetic import generate_corpus, signal_terms

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(number, title):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"criterion {number}: FAIL  {title}  ({type(exc).__name__}: "
                                f"{str(exc).splitlines()[0] if str(exc) else ''})")
        print(ACCEPTANCE_LINES[-1])
        raise
    ACCEPTANCE_LINES.append(f"criterion {number}: PASS  {title}  "
                            f"[{time.perf_counter() - t0:.2f}s]")
    print(ACCEPTANCE_LINES[-1])


# 1 ---------------------------------------------------------------------------------


def test_criterion_01_weighted_metrics_oracle():
    cases = [((702, 233, 94, 2136), (0.896, 0.897, 0.894)),
             ((610, 325, 632, 1598), (0.731, 0.698, 0.708)),
             ((482, 453, 282, 1948), (0.758, 0.768, 0.760))]
    with criterion(1, "weighted P/R/F from published confusion matrices within 0.0005"):
        for counts, expected in cases:
            m = metrics_from_confusion(ConfusionMatrix(*counts))
            got = (m.precision, m.recall, m.f_measure)
            for g, e in zip(got, expected):
                assert abs(g - e) <= 0.0005, f"{counts}: {got} vs {expected}"


# 2 ---------------------------------------------------------------------------------


def test_criterion_02_synthetic_replication():
    with criterion(2, "synthetic 500-issue corpus: F >= 0.85 for all models, J48 top-3 planted"):
        t0 = time.perf_counter()
        corpus = generate_corpus(500, seed=0)
        train, test = stratified_split(corpus, 0.5, seed=0)
        scores = {}
        for kind in ("nb", "smo", "j48"):
            scores[kind] = evaluate_holdout(train, test, kind, seed=0).metrics.f_measure
        assert all(f >= 0.85 for f in scores.values()), scores
        vocab = fit_corpus_vocabulary(train)
        tree = train_j48(build_matrix(train, vocab))
        top3 = [vocab.terms[j] for j, _ in feature_ranking(tree)[:3]]
        assert len(top3) == 3 and set(top3) <= signal_terms(), top3
        text = export_tree(tree, vocab)
        assert all(f"{t} " in text for t in top3)
        assert time.perf_counter() - t0 < 60


# 3 ---------------------------------------------------------------------------------


def _smo_fixtures():
    rng = np.random.default_rng(2024)
    for k in range(12):
        n, d = int(rng.integers(10, 40)), int(rng.integers(2, 8))
        X = np.abs(rng.normal(size=(n, d))) * (rng.random((n, d)) < 0.7)
        score = X @ rng.normal(size=d) + 0.3 * rng.normal(size=n)
        y = np.where(score > np.median(score), 1, -1)
        yield X, y, float(rng.choice([0.1, 1.0, 10.0])), k
    corpus = generate_corpus(120, seed=7)
    m = build_matrix(corpus, fit_corpus_vocabulary(corpus))
    yield m.to_csr().toarray(), m.signs().astype(int), 1.0, 99


def test_criterion_03_smo_invariants():
    with criterion(3, "SMO box, equality, KKT and monotone dual; 2-point hand solution"):
        hand = train_smo(dense_matrix([[1, 0], [0, 1]], [1, -1]), C=10.0)
        assert np.allclose(hand.alpha, [1, 1], atol=1e-6)
        assert np.allclose(hand.w.to_dense(2), [1, -1], atol=1e-6) and abs(hand.b) <= 1e-6
        checked = 0
        for X, y, C, seed in _smo_fixtures():
            m = train_smo(dense_matrix(X, y), C=C, seed=seed, record=True)
            if not m.converged:
                continue
            checked += 1
            a = m.alpha
            assert np.all(a >= 0) and np.all(a <= C)
            assert abs(float(a @ y)) <= 1e-8
            f = X @ m.w.to_dense(X.shape[1]) - m.b
            free = (a > 0) & (a < C)
            assert np.all(np.abs(y[free] * f[free] - 1) <= m.tol + 1e-9)
            assert np.all(m.objective_deltas >= 0)
            path = np.cumsum(m.objective_deltas)
            assert np.all(np.diff(path) >= 0)
            assert path[-1] == pytest.approx(dual_objective(a, y.astype(float), X @ X.T),
                                             rel=1e-9, abs=1e-9)
        assert checked >= 10


# 4 ---------------------------------------------------------------------------------


def _brute_exact_p(x, y):
    pooled = np.concatenate([x, y])
    n1 = len(x)
    u_obs = float(sum((a > b) for a in x for b in y))
    us = np.array([sum(pooled[i] > pooled[j] for i in idx for j in range(len(pooled))
                       if j not in idx) for idx in combinations(range(len(pooled)), n1)],
                  dtype=float)
    return min(1.0, 2 * min((us <= u_obs).mean(), (us >= u_obs).mean()))


def _u_distributions(n):
    """U counts for every n1, from all 2**n ways of marking n ranks as first sample."""
    masks = np.arange(2 ** n, dtype=np.int64)
    size = np.zeros(masks.shape, dtype=np.int64)
    rank_sum = np.zeros(masks.shape, dtype=np.int64)
    for j in range(n):
        bit = (masks >> j) & 1
        size += bit
        rank_sum += bit * (j + 1)
    out = {}
    for n1 in range(1, n):
        sel = size == n1
        u = rank_sum[sel] - n1 * (n1 + 1) // 2
        out[n1] = np.bincount(u, minlength=n1 * (n - n1) + 1)
    return out


def test_criterion_04_mann_whitney_oracle():
    with criterion(4, "Mann-Whitney exact p = enumeration (1e-12); normal within 0.02 for n1,n2 in 8..12"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(4)
        for _ in range(200):
            n1, n2 = rng.integers(2, 8, size=2)
            values = rng.permutation(1000)[: n1 + n2].astype(float)
            x, y = values[:n1], values[n1:]
            r = mann_whitney(x, y)
            assert r.method == "exact"
            assert abs(r.p_value - _brute_exact_p(x, y)) <= 1e-12
        # every size pair and every attainable U, with tie-free samples
        worst = 0.0
        cache = {}
        for n1 in range(8, 13):
            for n2 in range(8, 13):
                if n1 + n2 not in cache:
                    cache[n1 + n2] = _u_distributions(n1 + n2)
                counts = cache[n1 + n2][n1]
                cdf = np.cumsum(counts) / counts.sum()
                sf = np.cumsum(counts[::-1])[::-1] / counts.sum()
                y = np.arange(n2, dtype=float)
                for u in range(n1 * n2 + 1):
                    x = _sample_with_u(n1, n2, u)
                    assert len(set(x)) == n1
                    r = mann_whitney(x, y, method="normal")
                    assert r.statistic == u
                    worst = max(worst, abs(r.p_value - min(1.0, 2 * min(cdf[u], sf[u]))))
        assert worst <= 0.02, worst
        assert time.perf_counter() - t0 < 30


def _sample_with_u(n1, n2, u):
    """First-sample values against y = 0..n2-1 with exactly ``u`` pairs above."""
    x = np.full(n1, -0.5)
    remaining = u
    for i in range(n1):
        above = min(n2, remaining)
        x[i] = above - 0.5 + 1e-3 * i  # distinct values
        remaining -= above
    return x


# 5 ---------------------------------------------------------------------------------

# reference values from the Fortran AS R94 routine, and the eleven-weight example
# from the original Shapiro-Wilk article (W published to two decimals)
R94_VECTORS = [
    ([1.711, 3.8, 1.311], 0.8669320915059389, 0.28685546652651595),
    ([2.516, 2.829, 4.617, 2.708, 1.224], 0.9249151788619471, 0.5621300213434324),
    ([2.974, 1.477, 0.777, 2.23, 0.214, 1.133, 0.387, 3.114, 0.879, 2.775, 2.473],
     0.9134385806408145, 0.26771286382587967),
    ([1.414, 2.157, 3.526, 0.95, 0.281, 2.445, 4.172, 2.615, 3.23, 2.592, 0.268, 1.364],
     0.9602139919594758, 0.7868808599033786),
    ([148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236],
     0.7888146948631716, 0.006703814061898823),
]


def test_criterion_05_shapiro_wilk():
    with criterion(5, "Shapiro-Wilk: W({-1,0,1}) = 1, affine invariance 1e-12, reference vectors 1e-4"):
        assert shapiro_wilk([-1.0, 0.0, 1.0]).statistic == 1.0
        rng = np.random.default_rng(5)
        for _ in range(100):
            x = rng.normal(size=int(rng.integers(3, 200))) * rng.uniform(0.1, 10)
            scale = rng.uniform(0.01, 100) * rng.choice([-1, 1])
            shift = rng.uniform(-1000, 1000)
            a = shapiro_wilk(x).statistic
            b = shapiro_wilk(scale * x + shift).statistic
            assert abs(a - b) <= 1e-12, (a, b)
        for x, w, p in R94_VECTORS:
            r = shapiro_wilk(x)
            assert abs(r.statistic - w) <= 1e-4 and abs(r.p_value - p) <= 1e-4
        assert round(shapiro_wilk(R94_VECTORS[-1][0]).statistic, 2) == 0.79


# 6 ---------------------------------------------------------------------------------


def test_criterion_06_preprocessing_goldens():
    import json
    from wontfix.textprep import preprocess, stem_word, strip_markup, tokenize

    with criterion(6, "Snowball vectors 100%, markup/token goldens byte-exact, idempotent pipeline"):
        pairs = [line.split("\t") for line in
                 (DATA / "snowball_english.tsv").read_text(encoding="utf-8").splitlines()
                 if line and not line.startswith("#")]
        assert pairs and all(stem_word(w) == e for w, e in pairs)
        golden = json.loads((DATA / "golden_text.json").read_text(encoding="utf-8"))
        assert all(strip_markup(t) == e for t, e in golden["strip_markup"])
        assert all(tokenize(t) == e for t, e in golden["tokenize"])
        for line in (DATA / "issue_texts.txt").read_text(encoding="utf-8").splitlines():
            title, body = line.split("\t")
            once = preprocess(title, body)
            assert preprocess(" ".join(once), "") == once


# 7 ---------------------------------------------------------------------------------


def test_criterion_07_tfidf():
    ln15, ln3 = np.log(1.5), np.log(3.0)
    docs = [["app", "crash", "save", "crash"], ["app", "save", "file"],
            ["app", "crash", "file", "file", "open"]]
    hand = np.array([[0, 2 * ln15, ln15, 0, 0], [0, 0, ln15, ln15, 0],
                     [0, ln15, 0, 2 * ln15, ln3]])
    with criterion(7, "tf-idf: ubiquitous terms zero, hand matrix 1e-12, bit-exact refit"):
        vocab = fit_vocabulary(docs)
        dense = np.array([vectorize(d, vocab).to_dense(len(vocab)) for d in docs])
        assert np.abs(dense - hand).max() <= 1e-12
        assert np.all(dense[:, vocab.index("app")] == 0)
        again = fit_vocabulary([list(d) for d in docs])
        assert again.digest() == vocab.digest()
        for d in docs:
            assert vectorize(d, again).values.tobytes() == vectorize(d, vocab).values.tobytes()


# 8 ---------------------------------------------------------------------------------


def test_criterion_08_stratification():
    with criterion(8, "10-fold balance within 1, folds partition, split of 1,844/4,486 -> (922, 2,243)"):
        corpus = make_corpus(1844, 4486)
        folds = stratified_folds(corpus, 10, seed=8)
        assert sorted(i for f in folds for i in f) == list(range(len(corpus)))
        labels = corpus.labels()
        for cls in (IssueClass.WONTFIX, IssueClass.NON_WONTFIX):
            per = [sum(labels[i] is cls for i in f) for f in folds]
            assert max(per) - min(per) <= 1
        train, test = stratified_split(corpus, 0.5, seed=8)
        assert train.counts() == (922, 2243)
        assert test.counts() == (922, 2243)


# 9 ---------------------------------------------------------------------------------


def test_criterion_09_discussion_metrics():
    with criterion(9, "discussion metrics fixtures and invariants over 1,000 synthetic issues"):
        m = compute_metrics(make_issue(1, comments=["A", "A", "A", "B", "C"]))
        assert (m.n_actors, m.max_author_percentage, m.major_authors, m.minor_authors) == (3, 0.6, 1, 2)
        m = compute_metrics(make_issue(1, comments=["A", "B", "C", "A", "B", "C"]))
        assert (m.major_authors, m.minor_authors) == (0, 0)
        corpus = generate_corpus(1000, seed=9)
        assert len(corpus) == 1000
        for issue in corpus.issues:
            for opening in (False, True):
                m = compute_metrics(issue, count_opening_post=opening)
                assert 0 <= m.major_authors + m.minor_authors <= m.n_actors <= m.n_comments
                if m.n_comments:
                    assert 1 / m.n_actors <= m.max_author_percentage + 1e-12
                    assert m.max_author_percentage <= 1.0
                assert m.time_to_close >= 0 and m.time_to_discuss >= 0


# 10 --------------------------------------------------------------------------------


def test_criterion_10_miner(tmp_path):
    import json
    from wontfix.corpus import read_issues
    from wontfix.miner import GitHubClient, ReplaySession, mine, throttle

    fixtures = json.loads((DATA / "miner_fixtures.json").read_text(encoding="utf-8"))

    class Killed(BaseException):
        pass

    class Dying(ReplaySession):
        def __init__(self, fx, after):
            super().__init__(fx)
            self.after = after

        def get(self, *a, **kw):
            if len(self.calls) >= self.after:
                raise Killed()
            return super().get(*a, **kw)

    def ids(path):
        return [i.id for i, _ in read_issues(path)]

    with criterion(10, "miner kill-and-resume equals clean run; quota wait >= reset+1; legacy 40 s"):
        clean = tmp_path / "clean.jsonl"
        mine(GitHubClient(ReplaySession(fixtures), sleep=lambda s: None), "C#", 4, clean)
        expected = set(ids(clean))
        for kill_at in (2, 5, 9, 13):
            out, ckpt = tmp_path / f"k{kill_at}.jsonl", tmp_path / f"k{kill_at}.ckpt"
            with pytest.raises(Killed):
                mine(GitHubClient(Dying(fixtures, kill_at), sleep=lambda s: None), "C#", 4, out, ckpt)
            mine(GitHubClient(ReplaySession(fixtures), sleep=lambda s: None), "C#", 4, out, ckpt)
            got = ids(out)
            assert len(got) == len(set(got)) and set(got) == expected

        now = 1_700_000_000.0
        headers = {"X-RateLimit-Remaining": "0", "X-RateLimit-Reset": str(int(now) + 90)}
        assert throttle(headers, now=now) >= 91.0
        slept = []
        fx = {"/x": [{"status": 403, "headers": headers, "body": {}},
                     {"status": 200, "headers": {}, "body": []}]}
        GitHubClient(ReplaySession(fx), sleep=slept.append, clock=lambda: now).get("x")
        assert slept and slept[0] >= 91.0
        assert throttle({"X-RateLimit-Remaining": "4000"}, now=now, legacy=True) == 40.0
