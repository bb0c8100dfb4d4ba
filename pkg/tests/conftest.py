from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest

from wontfix.corpus import CommentRecord, IssueClass, IssueRecord, LabeledCorpus
from wontfix.features import SparseVector, TermDocumentMatrix, Vocabulary, Weighting

DATA = Path(__file__).parent / "data"
T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)


def make_issue(n: int = 1, labels=(), title="Title", body="Body", state="closed",
               comments=(), close_after_days: float | None = 2.0, author="alice",
               repo="acme/widgets") -> IssueRecord:
    """``comments`` is a sequence of author names or (author, hours, body) tuples."""
    recs = []
    for k, c in enumerate(comments):
        if isinstance(c, str):
            c = (c, k + 1, f"comment {k}")
        a, hours, text = c
        recs.append(CommentRecord(a, T0 + timedelta(hours=hours), text))
    closed = T0 + timedelta(days=close_after_days) if (state == "closed" and
                                                       close_after_days is not None) else None
    return IssueRecord(
        id=f"{repo}#{n}", repo=repo, url=f"https://github.com/{repo}/issues/{n}",
        title=title, body=body, state=state, raw_labels=tuple(labels), created_at=T0,
        closed_at=closed, author=author, author_role="outsider", comments=tuple(recs))


def make_corpus(n_wontfix: int, n_other: int, annotations=None) -> LabeledCorpus:
    issues = [make_issue(k, labels=("wontfix",)) for k in range(n_wontfix)]
    issues += [make_issue(n_wontfix + k, labels=("bug",)) for k in range(n_other)]
    return LabeledCorpus.from_issues(issues, annotations)


def dense_matrix(X, labels) -> TermDocumentMatrix:
    """Matrix from a dense docs x terms array and +1/-1 (or IssueClass) labels."""
    X = np.asarray(X, dtype=np.float64)
    vocab = Vocabulary(tuple(f"t{j}" for j in range(X.shape[1])), (1,) * X.shape[1],
                       max(X.shape[0], 1), Weighting.RAW)
    cols = []
    for row in X:
        nz = np.flatnonzero(row)
        cols.append(SparseVector(nz.astype(np.int64), row[nz]))
    labs = tuple(l if isinstance(l, IssueClass) else
                 (IssueClass.WONTFIX if l > 0 else IssueClass.NON_WONTFIX) for l in labels)
    return TermDocumentMatrix(vocab, tuple(str(k) for k in range(len(cols))), tuple(cols), labs)


@pytest.fixture
def data_dir() -> Path:
    return DATA


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
