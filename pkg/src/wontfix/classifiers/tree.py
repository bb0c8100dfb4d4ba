"""C4.5-style decision tree ("J48") on numeric tf-idf features.

Induction picks, per feature, the information-gain-maximizing midpoint
threshold; across features it keeps those whose gain reaches the mean
positive gain and takes the best gain ratio. Pruning replaces a subtree
by a leaf when the leaf's pessimistic error (binomial upper confidence
limit at ``cf``) does not exceed the subtree's. Subtree raising is not done.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv

from .. import _ext
from ..corpus import IssueClass
from ..features import SparseVector, TermDocumentMatrix, Vocabulary
from .base import Prediction, check_two_classes, value_at

MIN_GAIN = 1e-12


@dataclass(frozen=True)
class Node:
    n_wontfix: int
    n_non_wontfix: int
    feature: int = -1
    threshold: float = 0.0
    left: int = -1   # value <= threshold
    right: int = -1  # value > threshold

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @property
    def n(self) -> int:
        return self.n_wontfix + self.n_non_wontfix

    @property
    def majority(self) -> IssueClass:
        # ties go to the overall majority class
        return IssueClass.WONTFIX if self.n_wontfix > self.n_non_wontfix else IssueClass.NON_WONTFIX

    @property
    def errors(self) -> int:
        return self.n - max(self.n_wontfix, self.n_non_wontfix)


@dataclass(frozen=True)
class DecisionTreeModel:
    nodes: tuple[Node, ...]  # nodes[0] is the root
    cf: float
    min_leaf: int
    pruned: bool

    kind = "j48"

    def leaf_for(self, v: SparseVector) -> int:
        k = 0
        while not self.nodes[k].is_leaf:
            node = self.nodes[k]
            k = node.left if value_at(v, node.feature) <= node.threshold else node.right
        return k

    def predict(self, v: SparseVector) -> Prediction:
        leaf = self.nodes[self.leaf_for(v)]
        return Prediction(leaf.majority, leaf.n_wontfix / leaf.n)

    @property
    def n_leaves(self) -> int:
        return sum(1 for nd in self.nodes if nd.is_leaf)

    def depth_of(self) -> dict[int, int]:
        depth = {0: 0}
        for k, nd in enumerate(self.nodes):
            if not nd.is_leaf:
                depth[nd.left] = depth[k] + 1
                depth[nd.right] = depth[k] + 1
        return depth


def pessimistic_errors(errors: int, n: int, cf: float) -> float:
    """n times the upper ``cf`` confidence limit of the binomial error rate."""
    if n == 0:
        return 0.0
    if errors >= n:
        return float(n)
    return n * float(betaincinv(errors + 1, n - errors, 1.0 - cf))


class _Grower:
    def __init__(self, X, positive: np.ndarray, min_leaf: int):
        self.X = X.tocsr()
        self.positive = positive.astype(np.int64)
        self.min_leaf = min_leaf
        self.nodes: list[dict] = []

    def best_split(self, rows: np.ndarray):
        sub = self.X[rows].tocsc()
        sub.sum_duplicates()
        counts = np.diff(sub.indptr)
        cols = np.repeat(np.arange(sub.shape[1]), counts)
        order = np.lexsort((sub.data, cols))
        values = sub.data[order]
        pos = self.positive[rows][sub.indices[order]]
        n = len(rows)
        n_pos = int(self.positive[rows].sum())
        gain, split_info, threshold, _ = _ext.scan_splits(
            sub.indptr.astype(np.int64), values, pos, n, n_pos, self.min_leaf)
        valid = (gain > MIN_GAIN) & (split_info > 0)
        if not valid.any():
            return None
        mean_gain = gain[valid].mean()
        eligible = valid & (gain >= mean_gain - MIN_GAIN)
        ratio = np.where(eligible, gain / np.where(split_info > 0, split_info, 1.0), -np.inf)
        j = int(np.argmax(ratio))  # first maximum: lowest feature index wins ties
        return j, float(threshold[j])

    def grow(self, rows: np.ndarray) -> int:
        # iterative to keep deep trees off the Python stack
        root = self._new(rows)
        stack = [(root, rows)]
        while stack:
            k, idx = stack.pop()
            n = len(idx)
            n_pos = int(self.positive[idx].sum())
            if n_pos == 0 or n_pos == n or n < 2 * self.min_leaf:
                continue
            split = self.best_split(idx)
            if split is None:
                continue
            j, thr = split
            col = np.asarray(self.X[idx, j].todense()).ravel()
            go_left = col <= thr
            left_rows, right_rows = idx[go_left], idx[~go_left]
            left = self._new(left_rows)
            right = self._new(right_rows)
            self.nodes[k].update(feature=j, threshold=thr, left=left, right=right)
            stack.append((right, right_rows))
            stack.append((left, left_rows))
        return root

    def _new(self, rows: np.ndarray) -> int:
        n_pos = int(self.positive[rows].sum())
        self.nodes.append({"n_wontfix": n_pos, "n_non_wontfix": len(rows) - n_pos})
        return len(self.nodes) - 1


def _prune(nodes: list[dict], cf: float) -> None:
    """Bottom-up collapse, in place. Children always have larger indices."""
    err = [0.0] * len(nodes)
    for k in range(len(nodes) - 1, -1, -1):
        nd = nodes[k]
        n = nd["n_wontfix"] + nd["n_non_wontfix"]
        as_leaf = pessimistic_errors(n - max(nd["n_wontfix"], nd["n_non_wontfix"]), n, cf)
        if "feature" not in nd:
            err[k] = as_leaf
            continue
        subtree = err[nd["left"]] + err[nd["right"]]
        if as_leaf <= subtree:
            for key in ("feature", "threshold", "left", "right"):
                nd.pop(key)
            err[k] = as_leaf
        else:
            err[k] = subtree


def _compact(nodes: list[dict]) -> tuple[Node, ...]:
    """Drop unreachable nodes, renumbering in preorder."""
    out: list[dict] = []
    remap: dict[int, int] = {}
    stack = [0]
    while stack:
        k = stack.pop()
        remap[k] = len(out)
        out.append(dict(nodes[k]))
        if "feature" in nodes[k]:
            stack.append(nodes[k]["right"])
            stack.append(nodes[k]["left"])
    for nd in out:
        if "feature" in nd:
            nd["left"] = remap[nd["left"]]
            nd["right"] = remap[nd["right"]]
    return tuple(Node(**d) for d in out)


def train_j48(matrix: TermDocumentMatrix, labels=None, cf: float = 0.25, min_leaf: int = 2,
              prune: bool = True) -> DecisionTreeModel:
    if not 0.0 < cf < 1.0:
        raise ValueError("confidence factor must lie in (0, 1)")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    m = matrix if labels is None else matrix.with_labels(labels)
    y = check_two_classes(m)
    grower = _Grower(m.to_csr(), (y > 0).astype(np.int64), min_leaf)
    grower.grow(np.arange(m.n_docs))
    if prune:
        _prune(grower.nodes, cf)
    return DecisionTreeModel(_compact(grower.nodes), float(cf), int(min_leaf), bool(prune))


def predict_tree(model: DecisionTreeModel, v: SparseVector) -> Prediction:
    return model.predict(v)


def _counts(nd: Node) -> str:
    return f"[wontfix={nd.n_wontfix} non_wontfix={nd.n_non_wontfix}]"


def export_tree(model: DecisionTreeModel, vocab: Vocabulary | None = None) -> str:
    """One line per node; children are indented under the split they refine.

    Each non-root line starts with its branch test, ``term <= w`` or
    ``term > w``; leaves end with their class and training counts.
    """
    def name(j: int) -> str:
        return vocab.terms[j] if vocab is not None else f"f{j}"

    def describe(nd: Node) -> str:
        if nd.is_leaf:
            return f"{nd.majority.value} {_counts(nd)}"
        return f"split on {name(nd.feature)} {_counts(nd)}"

    def children(nd: Node, depth: int):
        test = f"{name(nd.feature)} %s {nd.threshold:.6g}"
        # right first so the left branch pops (and is expanded) first
        return [(nd.right, depth, test % ">"), (nd.left, depth, test % "<=")]

    root = model.nodes[0]
    lines = [describe(root)]
    stack = children(root, 1) if not root.is_leaf else []
    while stack:
        k, depth, test = stack.pop()
        nd = model.nodes[k]
        lines.append(f"{'|   ' * depth}{test}: {describe(nd)}")
        if not nd.is_leaf:
            stack.extend(children(nd, depth + 1))
    return "\n".join(lines)


def feature_ranking(model: DecisionTreeModel, discount: float = 0.5) -> list[tuple[int, float]]:
    """Features ordered by usage, each split weighted by ``discount ** depth``."""
    depth = model.depth_of()
    score: dict[int, float] = {}
    for k, nd in enumerate(model.nodes):
        if not nd.is_leaf:
            score[nd.feature] = score.get(nd.feature, 0.0) + discount ** depth[k]
    return sorted(score.items(), key=lambda kv: (-kv[1], kv[0]))
