"""Issue data model, JSONL ingestion, wontfix classing and stratified splits."""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import DegenerateClass, DuplicateId, MissingField, OpenIssue, ParseError

SECONDS_PER_DAY = 86_400.0

AUTHOR_ROLES = ("owner", "member", "contributor", "collaborator", "outsider")
STATES = ("open", "closed")

# Label variants seen in the wild, after normalization.
CANONICAL_WONTFIX = frozenset({
    "wontfix",
    "statuswontfix",
    "resolutionwontfix",
    "resolvedwontfix",
    "closedwontfix",
    "notfixing",
    "statuswillnotfix",
    "cannotfix",
})

_LABEL_NOISE = re.compile(r"[\s'’‘`\-_:]+")


class IssueClass(str, enum.Enum):
    WONTFIX = "wontfix"
    NON_WONTFIX = "non_wontfix"

    @property
    def sign(self) -> int:
        return 1 if self is IssueClass.WONTFIX else -1

    def swapped(self) -> "IssueClass":
        return IssueClass.NON_WONTFIX if self is IssueClass.WONTFIX else IssueClass.WONTFIX


CLASS_ORDER = (IssueClass.WONTFIX, IssueClass.NON_WONTFIX)


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO 8601 timestamp into an aware UTC datetime."""
    if not isinstance(value, str):
        raise ValueError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def days_between(start: datetime, end: datetime) -> float:
    return (end - start).total_seconds() / SECONDS_PER_DAY


@dataclass(frozen=True)
class CommentRecord:
    author: str
    created_at: datetime
    body: str = ""


@dataclass(frozen=True)
class IssueRecord:
    id: str
    repo: str
    url: str
    title: str
    body: str
    state: str
    raw_labels: tuple[str, ...]
    created_at: datetime
    closed_at: datetime | None
    author: str
    author_role: str
    comments: tuple[CommentRecord, ...] = ()
    provenance: str | None = None


# --- taxonomy -------------------------------------------------------------

@dataclass(frozen=True)
class Taxonomy:
    version: int
    opening_groups: Mapping[str, tuple[str, ...]]
    closing_groups: Mapping[str, tuple[str, ...]]

    def opening_group_of(self, motivation: str) -> str:
        return _group_of(self.opening_groups, motivation, "opening")

    def closing_group_of(self, motivation: str) -> str:
        return _group_of(self.closing_groups, motivation, "closing")

    @property
    def opening_motivations(self) -> tuple[str, ...]:
        return tuple(m for ms in self.opening_groups.values() for m in ms)

    @property
    def closing_motivations(self) -> tuple[str, ...]:
        return tuple(m for ms in self.closing_groups.values() for m in ms)


def _group_of(groups: Mapping[str, tuple[str, ...]], motivation: str, kind: str) -> str:
    for group, members in groups.items():
        if motivation in members:
            return group
    raise KeyError(f"unknown {kind} motivation {motivation!r}")


@lru_cache(maxsize=1)
def load_taxonomy() -> Taxonomy:
    raw = json.loads(resources.files("wontfix.data").joinpath("taxonomy.json").read_text("utf-8"))
    return Taxonomy(
        version=raw["version"],
        opening_groups={k: tuple(v) for k, v in raw["opening"].items()},
        closing_groups={k: tuple(v) for k, v in raw["closing"].items()},
    )


@dataclass(frozen=True)
class TaxonomyAnnotation:
    opening: frozenset[str]
    closing: frozenset[str]

    def __post_init__(self):
        tax = load_taxonomy()
        if not self.opening or not self.closing:
            raise ValueError("annotation needs at least one opening and one closing motivation")
        for m in self.opening:
            tax.opening_group_of(m)
        for m in self.closing:
            tax.closing_group_of(m)

    @property
    def closing_groups(self) -> frozenset[str]:
        tax = load_taxonomy()
        return frozenset(tax.closing_group_of(m) for m in self.closing)


# --- classing ---------------------------------------------------------------

def normalize_label(raw: str) -> str:
    return _LABEL_NOISE.sub("", raw.lower())


def normalize_wontfix_label(raw: str) -> bool:
    """True when ``raw`` is one of the known spellings of a wontfix label.

    >>> normalize_wontfix_label("status: will not fix")
    True
    """
    return normalize_label(raw) in CANONICAL_WONTFIX


def assign_class(issue: IssueRecord) -> IssueClass:
    if issue.state != "closed":
        raise OpenIssue(f"{issue.id} is {issue.state}; only closed issues can be classed")
    if any(normalize_wontfix_label(label) for label in issue.raw_labels):
        return IssueClass.WONTFIX
    return IssueClass.NON_WONTFIX


# --- corpus -----------------------------------------------------------------

@dataclass(frozen=True)
class LabeledCorpus:
    issues: tuple[IssueRecord, ...]
    class_of: Mapping[str, IssueClass]
    annotations: Mapping[str, TaxonomyAnnotation] = field(default_factory=dict)

    def __post_init__(self):
        ids = [i.id for i in self.issues]
        if len(set(ids)) != len(ids):
            raise DuplicateId("duplicate issue id in corpus")
        missing = [i for i in ids if i not in self.class_of]
        if missing:
            raise ValueError(f"issues without a class: {missing[:5]}")

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self) -> Iterator[IssueRecord]:
        return iter(self.issues)

    def counts(self) -> tuple[int, int]:
        """(wontfix, non_wontfix) tallies."""
        n_w = sum(1 for i in self.issues if self.class_of[i.id] is IssueClass.WONTFIX)
        return n_w, len(self.issues) - n_w

    def labels(self) -> list[IssueClass]:
        return [self.class_of[i.id] for i in self.issues]

    def signs(self) -> np.ndarray:
        return np.array([self.class_of[i.id].sign for i in self.issues], dtype=np.int8)

    def subset(self, indices: Iterable[int]) -> "LabeledCorpus":
        picked = tuple(self.issues[k] for k in sorted(indices))
        ids = {i.id for i in picked}
        return LabeledCorpus(
            issues=picked,
            class_of={k: v for k, v in self.class_of.items() if k in ids},
            annotations={k: v for k, v in self.annotations.items() if k in ids},
        )

    def swapped(self) -> "LabeledCorpus":
        return LabeledCorpus(self.issues, {k: v.swapped() for k, v in self.class_of.items()},
                             self.annotations)

    @classmethod
    def from_issues(cls, issues: Iterable[IssueRecord],
                    annotations: Mapping[str, TaxonomyAnnotation] | None = None) -> "LabeledCorpus":
        issues = tuple(issues)
        return cls(issues, {i.id: assign_class(i) for i in issues}, dict(annotations or {}))


_REQUIRED = ("id", "repo", "url", "title", "state", "labels", "created_at", "author", "author_role")


def _require(obj: dict, key: str, line: int):
    if key not in obj:
        raise MissingField(key, line)
    return obj[key]


def issue_from_json(obj: dict, line: int = 0) -> tuple[IssueRecord, TaxonomyAnnotation | None]:
    if not isinstance(obj, dict):
        raise ParseError(line, "expected a JSON object")
    for key in _REQUIRED:
        _require(obj, key, line)
    try:
        created = parse_timestamp(obj["created_at"])
        closed = parse_timestamp(obj["closed_at"]) if obj.get("closed_at") else None
        comments = tuple(
            CommentRecord(
                author=_require(c, "author", line) or "ghost",
                created_at=parse_timestamp(_require(c, "created_at", line)),
                body=c.get("body") or "",
            )
            for c in obj.get("comments") or ()
        )
    except (ValueError, TypeError, AttributeError) as exc:
        raise ParseError(line, str(exc)) from None

    if obj["state"] not in STATES:
        raise ParseError(line, f"state must be one of {STATES}, got {obj['state']!r}")
    if obj["author_role"] not in AUTHOR_ROLES:
        raise ParseError(line, f"author_role must be one of {AUTHOR_ROLES}, got {obj['author_role']!r}")
    if not isinstance(obj["labels"], list) or not all(isinstance(x, str) for x in obj["labels"]):
        raise ParseError(line, "labels must be a list of strings")
    if closed is not None and closed < created:
        raise ParseError(line, "closed_at precedes created_at")
    stamps = [c.created_at for c in comments]
    if any(b < a for a, b in zip(stamps, stamps[1:])):
        raise ParseError(line, "comments are not ordered by created_at")
    if stamps and stamps[0] < created:
        raise ParseError(line, "comment precedes issue creation")
    if not re.fullmatch(r"[^/\s]+/[^/\s]+", obj["repo"]):
        raise ParseError(line, f"repo must look like owner/name, got {obj['repo']!r}")

    issue = IssueRecord(
        id=str(obj["id"]),
        repo=obj["repo"],
        url=obj["url"],
        title=obj["title"] or "",
        body=obj.get("body") or "",
        state=obj["state"],
        raw_labels=tuple(obj["labels"]),
        created_at=created,
        closed_at=closed,
        author=obj["author"] or "ghost",
        author_role=obj["author_role"],
        comments=comments,
        provenance=obj.get("provenance"),
    )
    annotation = None
    if obj.get("annotations"):
        ann = obj["annotations"]
        try:
            annotation = TaxonomyAnnotation(frozenset(ann.get("opening", ())),
                                            frozenset(ann.get("closing", ())))
        except (KeyError, ValueError) as exc:
            raise ParseError(line, f"bad annotation: {exc}") from None
    return issue, annotation


def issue_to_json(issue: IssueRecord, annotation: TaxonomyAnnotation | None = None) -> dict:
    obj = {
        "id": issue.id,
        "repo": issue.repo,
        "url": issue.url,
        "title": issue.title,
        "body": issue.body,
        "state": issue.state,
        "labels": list(issue.raw_labels),
        "created_at": format_timestamp(issue.created_at),
        "closed_at": format_timestamp(issue.closed_at) if issue.closed_at else None,
        "author": issue.author,
        "author_role": issue.author_role,
        "comments": [
            {"author": c.author, "created_at": format_timestamp(c.created_at), "body": c.body}
            for c in issue.comments
        ],
    }
    if annotation is not None:
        obj["annotations"] = {"opening": sorted(annotation.opening),
                              "closing": sorted(annotation.closing)}
    if issue.provenance:
        obj["provenance"] = issue.provenance
    return obj


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None


def read_issues(path: str | Path) -> list[tuple[IssueRecord, TaxonomyAnnotation | None]]:
    """Parse issues without classing them (open issues allowed)."""
    out = []
    seen: set[str] = set()
    for lineno, obj in iter_jsonl(path):
        issue, ann = issue_from_json(obj, lineno)
        if issue.id in seen:
            raise DuplicateId(f"line {lineno}: duplicate id {issue.id!r}")
        seen.add(issue.id)
        out.append((issue, ann))
    return out


def load_corpus(path: str | Path) -> LabeledCorpus:
    parsed = read_issues(path)
    issues = tuple(i for i, _ in parsed)
    return LabeledCorpus(
        issues=issues,
        class_of={i.id: assign_class(i) for i in issues},
        annotations={i.id: a for i, a in parsed if a is not None},
    )


def write_corpus(corpus: LabeledCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for issue in corpus.issues:
            fh.write(json.dumps(issue_to_json(issue, corpus.annotations.get(issue.id)),
                                ensure_ascii=False) + "\n")


# --- splitting ----------------------------------------------------------------

def _class_indices(corpus: LabeledCorpus) -> dict[IssueClass, list[int]]:
    out: dict[IssueClass, list[int]] = {c: [] for c in CLASS_ORDER}
    for k, issue in enumerate(corpus.issues):
        out[corpus.class_of[issue.id]].append(k)
    return out


def stratified_split(corpus: LabeledCorpus, fraction: float = 0.5,
                     seed: int = 0) -> tuple[LabeledCorpus, LabeledCorpus]:
    """Per-class random split; each class sends floor(fraction * size) to train."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    for cls, members in _class_indices(corpus).items():
        if len(members) < 2:
            raise DegenerateClass(f"class {cls.value} has {len(members)} member(s); need >= 2")
        order = rng.permutation(len(members))
        take = math.floor(fraction * len(members))
        train_idx.extend(members[i] for i in order[:take])
    chosen = set(train_idx)
    test_idx = [k for k in range(len(corpus)) if k not in chosen]
    return corpus.subset(train_idx), corpus.subset(test_idx)


def stratified_folds(corpus: LabeledCorpus, k: int, seed: int = 0) -> list[list[int]]:
    """Fold membership (corpus indices) by per-class round-robin over a seeded shuffle."""
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for members in _class_indices(corpus).values():
        order = rng.permutation(len(members))
        for pos, i in enumerate(order):
            folds[(offset + pos) % k].append(members[i])
        # continue the deal where the previous class stopped so fold sizes stay balanced
        offset = (offset + len(members)) % k
    return [sorted(f) for f in folds]
