"""Seeded synthetic issue corpora.

Wontfix issues carry a few enhancement-request words, the rest carry bug
words; everything else is Zipf-distributed filler. Discussion metadata
(comment authors, timestamps) is random but schema-valid, so the same
corpora exercise the classifiers and the analytics.
"""

from __future__ import annotations

import string
from datetime import datetime, timedelta, timezone
from typing import Callable

import numpy as np

from .corpus import (CommentRecord, IssueClass, IssueRecord, LabeledCorpus, TaxonomyAnnotation,
                     load_taxonomy)
from .textprep import preprocess

ENHANCEMENT_WORDS = ("make", "change", "provide", "support", "option", "allow", "feature",
                     "request", "configurable", "customize")
BUG_WORDS = ("crash", "error", "exception", "fail", "broken", "stacktrace", "segfault",
             "freeze", "regression", "traceback")

EPOCH = datetime(2018, 1, 1, tzinfo=timezone.utc)
REPOS = ("acme/widgets", "acme/gizmo", "example/toolkit", "example/engine")

CloseDays = Callable[[np.random.Generator, int, frozenset], float]


def signal_terms() -> frozenset[str]:
    """Stems of every planted word."""
    return frozenset(t for w in ENHANCEMENT_WORDS + BUG_WORDS for t in preprocess(w, ""))


def _filler_vocabulary(rng: np.random.Generator, size: int) -> list[str]:
    consonants = "bcdfghjklmnprstvz"
    vowels = "aeiou"
    planted = signal_terms()
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < size:
        n_syll = int(rng.integers(2, 4))
        w = "".join(consonants[rng.integers(len(consonants))] + vowels[rng.integers(len(vowels))]
                    for _ in range(n_syll))
        stems = preprocess(w, "")
        # keep words that survive preprocessing as one new, unplanted stem
        if len(stems) == 1 and stems[0] not in planted and stems[0] not in seen:
            seen.add(stems[0])
            words.append(w)
    return words


def _text(rng: np.random.Generator, filler: list[str], weights: np.ndarray, n: int) -> list[str]:
    return [filler[k] for k in rng.choice(len(filler), size=n, p=weights)]


def generate_corpus(n: int = 500, wontfix_share: float = 0.3, seed: int = 0,
                    signal_per_doc: tuple[int, int] = (1, 3), filler_size: int = 400,
                    zipf_s: float = 1.1, annotate: bool = False,
                    close_days: CloseDays | None = None) -> LabeledCorpus:
    """A labeled corpus of ``n`` closed issues.

    ``close_days(rng, n_actors, closing_groups)`` overrides the default
    exponential time-to-close, for planting effects the analytics should find.
    With ``annotate`` every wontfix issue gets random taxonomy annotations.
    """
    rng = np.random.default_rng(seed)
    filler = _filler_vocabulary(rng, filler_size)
    ranks = np.arange(1, filler_size + 1, dtype=np.float64)
    weights = ranks ** -zipf_s
    weights /= weights.sum()
    tax = load_taxonomy()
    opening = tax.opening_motivations
    closing = tax.closing_motivations
    people = [f"user{k}" for k in range(40)]
    alphabet = string.ascii_lowercase

    n_wontfix = round(n * wontfix_share)
    classes = [IssueClass.WONTFIX] * n_wontfix + [IssueClass.NON_WONTFIX] * (n - n_wontfix)
    classes = [classes[k] for k in rng.permutation(n)]

    issues, annotations = [], {}
    for k, cls in enumerate(classes):
        words = ENHANCEMENT_WORDS if cls is IssueClass.WONTFIX else BUG_WORDS
        n_signal = int(rng.integers(signal_per_doc[0], signal_per_doc[1] + 1))
        planted = [words[j] for j in rng.choice(len(words), size=n_signal, replace=False)]
        body_words = _text(rng, filler, weights, int(rng.integers(15, 60))) + planted
        rng.shuffle(body_words)
        title = " ".join(_text(rng, filler, weights, int(rng.integers(3, 7))))
        body = " ".join(body_words)

        repo = REPOS[k % len(REPOS)]
        issue_id = f"{repo}#{k + 1}"
        created = EPOCH + timedelta(minutes=int(rng.integers(0, 60 * 24 * 700)))
        author = people[int(rng.integers(len(people)))]
        n_comments = int(rng.poisson(3.0))
        pool = [author] + [people[int(j)] for j in rng.choice(len(people), size=4, replace=False)]
        ann = None
        if annotate and cls is IssueClass.WONTFIX:
            ann = TaxonomyAnnotation(
                frozenset(opening[j] for j in rng.choice(len(opening), size=1)),
                frozenset(closing[j] for j in rng.choice(len(closing),
                                                         size=int(rng.integers(1, 3)), replace=False)))
            annotations[issue_id] = ann
        authors = [pool[int(j)] for j in rng.integers(0, len(pool), size=n_comments)]
        n_actors = len(set(authors))
        if close_days is not None:
            days = float(close_days(rng, n_actors, ann.closing_groups if ann else frozenset()))
        else:
            days = float(rng.exponential(40.0))
        closed = created + timedelta(days=days)
        stamps = sorted(rng.uniform(0.0, days, size=n_comments))
        comments = tuple(
            CommentRecord(a, created + timedelta(days=float(t)),
                          "".join(alphabet[j] for j in rng.integers(0, 26, size=int(rng.integers(5, 200)))))
            for a, t in zip(authors, stamps))
        labels = ("wontfix",) if cls is IssueClass.WONTFIX else (("bug",) if rng.random() < 0.7 else ())
        issues.append(IssueRecord(
            id=issue_id, repo=repo, url=f"https://github.com/{repo}/issues/{k + 1}",
            title=title, body=body, state="closed", raw_labels=labels,
            created_at=created, closed_at=closed, author=author, author_role="outsider",
            comments=comments))
    return LabeledCorpus.from_issues(issues, annotations)
