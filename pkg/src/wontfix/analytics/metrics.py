"""Per-issue discussion metrics."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass

from ..corpus import IssueRecord, days_between
from ..errors import MissingCloseTime

METRIC_NAMES = (
    "description_length",
    "max_author_percentage",
    "major_authors",
    "minor_authors",
    "mean_comment_size",
    "n_actors",
    "n_comments",
    "time_to_close",
    "time_to_discuss",
)


@dataclass(frozen=True)
class DiscussionMetrics:
    description_length: int
    max_author_percentage: float
    major_authors: int
    minor_authors: int
    mean_comment_size: float
    n_actors: int
    n_comments: int
    time_to_close: float | None  # days; None only when computed without a close time
    time_to_discuss: float  # days from opening to the last message

    def as_dict(self) -> dict:
        return asdict(self)

    def __getitem__(self, name: str):
        if name not in METRIC_NAMES:
            raise KeyError(name)
        return getattr(self, name)


def compute_metrics(issue: IssueRecord, count_opening_post: bool = False,
                    require_close: bool = True) -> DiscussionMetrics:
    """Metrics over the issue's discussion messages.

    Messages are the comments; with ``count_opening_post`` the description
    is one more message by the issue author. An author is major when they
    wrote more than a third of the messages and minor when they wrote less;
    exactly a third counts as neither.
    """
    if issue.closed_at is None and require_close:
        raise MissingCloseTime(f"issue {issue.id} has no close time")
    authors = [c.author for c in issue.comments]
    sizes = [len(c.body) for c in issue.comments]
    if count_opening_post:
        authors.insert(0, issue.author)
        sizes.insert(0, len(issue.body))
    n = len(authors)
    per_author = Counter(authors)
    # integer comparisons: 3*k vs n avoids rounding at exactly one third
    major = sum(1 for k in per_author.values() if 3 * k > n)
    minor = sum(1 for k in per_author.values() if 3 * k < n)
    last = issue.comments[-1].created_at if issue.comments else issue.created_at
    return DiscussionMetrics(
        description_length=len(issue.body),
        max_author_percentage=max(per_author.values()) / n if n else 0.0,
        major_authors=major,
        minor_authors=minor,
        mean_comment_size=sum(sizes) / n if n else 0.0,
        n_actors=len(per_author),
        n_comments=n,
        time_to_close=(days_between(issue.created_at, issue.closed_at)
                       if issue.closed_at is not None else None),
        time_to_discuss=days_between(issue.created_at, last),
    )
