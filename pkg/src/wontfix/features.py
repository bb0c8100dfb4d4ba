"""Vocabulary fitting, tf-idf weighting and sparse term-document matrices.

Documents are stored row-wise (one CSR row per issue); the "term-document"
view is simply the transpose and is never materialized.
"""

from __future__ import annotations

import enum
import hashlib
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import IssueClass, LabeledCorpus
from .errors import DomainError, EmptyCorpus, FormatError
from .textprep import preprocess


class Weighting(str, enum.Enum):
    RAW = "raw"              # tf * ln(n / df)
    SUBLINEAR = "sublinear"  # (1 + ln tf) * ln(n / df)


def tfidf(tf: float, df: int, n: int, weighting: Weighting = Weighting.RAW) -> float:
    if df < 1 or df > n:
        raise DomainError(f"document frequency {df} outside [1, {n}]")
    if tf < 0:
        raise DomainError(f"negative term frequency {tf}")
    if tf == 0:
        return 0.0
    idf = math.log(n / df)
    if weighting is Weighting.SUBLINEAR:
        return (1.0 + math.log(tf)) * idf
    return tf * idf


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    df: tuple[int, ...]
    n_docs: int
    weighting: Weighting = Weighting.RAW

    def __post_init__(self):
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})
        idf = np.log(self.n_docs / np.asarray(self.df, dtype=np.float64)) if self.terms \
            else np.zeros(0)
        object.__setattr__(self, "_idf", idf)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def index(self, term: str) -> int:
        return self._index[term]

    def get(self, term: str) -> int | None:
        return self._index.get(term)

    def doc_freq(self, term: str) -> int:
        return self.df[self._index[term]]

    @property
    def idf(self) -> np.ndarray:
        return self._idf

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n_docs}\t{self.weighting.value}\n".encode())
        for t, d in zip(self.terms, self.df):
            h.update(f"{t}\t{d}\n".encode())
        return h.hexdigest()[:16]

    def to_tsv(self) -> str:
        lines = [f"# n_docs={self.n_docs} weighting={self.weighting.value}", "index\tterm\tdf"]
        lines += [f"{i}\t{t}\t{d}" for i, (t, d) in enumerate(zip(self.terms, self.df))]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "Vocabulary":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# n_docs="):
            raise FormatError("vocabulary file lacks its header")
        meta = dict(kv.split("=", 1) for kv in lines[0][2:].split())
        terms, dfs = [], []
        for k, line in enumerate(lines[2:]):
            idx, term, d = line.split("\t")
            if int(idx) != k:
                raise FormatError(f"vocabulary index {idx} out of order")
            terms.append(term)
            dfs.append(int(d))
        return cls(tuple(terms), tuple(dfs), int(meta["n_docs"]), Weighting(meta["weighting"]))

    def to_dict(self) -> dict:
        return {"terms": list(self.terms), "df": list(self.df), "n_docs": self.n_docs,
                "weighting": self.weighting.value}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(tuple(d["terms"]), tuple(d["df"]), d["n_docs"], Weighting(d["weighting"]))


def fit_vocabulary(docs: Sequence[Sequence[str]], min_df: int = 1,
                   weighting: Weighting = Weighting.RAW) -> Vocabulary:
    if len(docs) == 0:
        raise EmptyCorpus("cannot fit a vocabulary on zero documents")
    df: Counter[str] = Counter()
    first_seen: dict[str, None] = {}
    for doc in docs:
        for term in dict.fromkeys(doc):
            df[term] += 1
            first_seen.setdefault(term, None)
    terms = tuple(t for t in first_seen if df[t] >= min_df)
    return Vocabulary(terms, tuple(df[t] for t in terms), len(docs), weighting)


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray   # float64, finite, > 0

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        items = sorted((int(i), float(v)) for i, v in pairs if v != 0.0)
        if not items:
            return cls.empty()
        idx, val = zip(*items)
        return cls(np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.indices)

    def dot(self, dense: np.ndarray) -> float:
        return float(np.dot(dense[self.indices], self.values)) if len(self.indices) else 0.0

    def scaled(self, k: float) -> "SparseVector":
        return SparseVector(self.indices, self.values * k)

    def to_dense(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        out[self.indices] = self.values
        return out


def vectorize(tokens: Sequence[str], vocab: Vocabulary) -> SparseVector:
    counts: Counter[int] = Counter()
    for t in tokens:
        i = vocab.get(t)
        if i is not None:
            counts[i] += 1
    if not counts:
        return SparseVector.empty()
    idx = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    tf = np.array([counts[i] for i in idx], dtype=np.float64)
    if vocab.weighting is Weighting.SUBLINEAR:
        tf = 1.0 + np.log(tf)
    w = tf * vocab.idf[idx]
    keep = w != 0.0
    return SparseVector(idx[keep], w[keep])


@lru_cache(maxsize=200_000)
def _tokens(title: str, body: str) -> tuple[str, ...]:
    return tuple(preprocess(title, body))


def issue_tokens(issue) -> tuple[str, ...]:
    return _tokens(issue.title, issue.body)


@dataclass(frozen=True)
class TermDocumentMatrix:
    vocab: Vocabulary
    doc_ids: tuple[str, ...]
    columns: tuple[SparseVector, ...]
    labels: tuple[IssueClass, ...]

    def __post_init__(self):
        if not (len(self.doc_ids) == len(self.columns) == len(self.labels)):
            raise ValueError("doc ids, columns and labels must align")

    @property
    def n_docs(self) -> int:
        return len(self.columns)

    @property
    def n_terms(self) -> int:
        return len(self.vocab)

    def signs(self) -> np.ndarray:
        return np.array([c.sign for c in self.labels], dtype=np.float64)

    def to_csr(self) -> sp.csr_matrix:
        """Documents as rows, terms as columns."""
        indptr = np.zeros(self.n_docs + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(c) for c in self.columns])
        if self.n_docs and indptr[-1]:
            indices = np.concatenate([c.indices for c in self.columns])
            data = np.concatenate([c.values for c in self.columns])
        else:
            indices = np.zeros(0, dtype=np.int64)
            data = np.zeros(0)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n_docs, self.n_terms))

    def with_labels(self, labels: Sequence[IssueClass]) -> "TermDocumentMatrix":
        return TermDocumentMatrix(self.vocab, self.doc_ids, self.columns, tuple(labels))


def build_matrix(corpus: LabeledCorpus, vocab: Vocabulary) -> TermDocumentMatrix:
    cols = tuple(vectorize(issue_tokens(i), vocab) for i in corpus.issues)
    return TermDocumentMatrix(vocab, tuple(i.id for i in corpus.issues), cols,
                              tuple(corpus.labels()))


def fit_corpus_vocabulary(corpus: LabeledCorpus, min_df: int = 1,
                          weighting: Weighting = Weighting.RAW) -> Vocabulary:
    return fit_vocabulary([issue_tokens(i) for i in corpus.issues], min_df, weighting)


# --- persistence ----------------------------------------------------------------

MATRIX_MAGIC = "# wontfix-matrix v1"


def save_matrix(matrix: TermDocumentMatrix, path: str | Path) -> None:
    v = matrix.vocab
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MATRIX_MAGIC + "\n")
        fh.write(f"n_terms={v.__len__()} n_docs={matrix.n_docs} weighting={v.weighting.value} "
                 f"vocab_hash={v.digest()}\n")
        for doc_id, label, col in zip(matrix.doc_ids, matrix.labels, matrix.columns):
            cells = " ".join(f"{i}:{w!r}" for i, w in zip(col.indices.tolist(), col.values.tolist()))
            fh.write(f"{doc_id}\t{label.value}\t{cells}\n")


def load_matrix(path: str | Path, vocab: Vocabulary) -> TermDocumentMatrix:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or lines[0] != MATRIX_MAGIC:
        raise FormatError(f"{path}: not a matrix file")
    header = dict(kv.split("=", 1) for kv in lines[1].split())
    if header["vocab_hash"] != vocab.digest() or int(header["n_terms"]) != len(vocab):
        raise FormatError(f"{path}: matrix was built with a different vocabulary")
    ids, labels, cols = [], [], []
    for line in lines[2:]:
        doc_id, label, cells = line.split("\t")
        pairs = [(int(i), float(w)) for i, w in (c.split(":") for c in cells.split())]
        ids.append(doc_id)
        labels.append(IssueClass(label))
        cols.append(SparseVector.from_pairs(pairs))
    if len(ids) != int(header["n_docs"]):
        raise FormatError(f"{path}: expected {header['n_docs']} rows, found {len(ids)}")
    return TermDocumentMatrix(vocab, tuple(ids), tuple(cols), tuple(labels))
