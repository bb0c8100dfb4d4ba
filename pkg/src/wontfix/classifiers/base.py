from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import IssueClass
from ..errors import SingleClass
from ..features import SparseVector, TermDocumentMatrix


@dataclass(frozen=True)
class Prediction:
    cls: IssueClass
    score: float  # higher means more wontfix


def check_two_classes(matrix: TermDocumentMatrix) -> np.ndarray:
    """Return the {+1, -1} label vector, insisting both classes are present."""
    y = matrix.signs()
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClass("training data must contain both wontfix and non_wontfix issues")
    return y


def value_at(v: SparseVector, feature: int) -> float:
    k = int(np.searchsorted(v.indices, feature))
    if k < len(v.indices) and v.indices[k] == feature:
        return float(v.values[k])
    return 0.0
