"""GitHub REST miner: top-starred repositories per language, their closed
issues and comments, with quota-aware throttling and resumable checkpoints.

HTTP goes through an injectable session (anything with a requests-style
``get``), so the whole miner runs offline against :class:`ReplaySession`.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping
from urllib.parse import urlencode

import requests

from .corpus import (CommentRecord, IssueRecord, issue_from_json, issue_to_json,
                     normalize_wontfix_label, parse_timestamp)
from .errors import AuthError, MinerError, NotFound, RateLimited, TransportError

log = logging.getLogger(__name__)

API_ROOT = "https://api.github.com"
PAGE_SIZE = 100
LEGACY_PAUSE = 40.0
GHOST = "ghost"
CHECKPOINT_VERSION = 1

ROLE_OF_ASSOCIATION = {
    "OWNER": "owner",
    "MEMBER": "member",
    "COLLABORATOR": "collaborator",
    "CONTRIBUTOR": "contributor",
    "FIRST_TIME_CONTRIBUTOR": "contributor",
}


@dataclass(frozen=True)
class RepoRef:
    full_name: str
    stars: int
    primary_language: str

    def __post_init__(self):
        owner, _, name = self.full_name.partition("/")
        if not owner or not name or "/" in name:
            raise ValueError(f"repository name must look like owner/name: {self.full_name!r}")
        if self.stars < 0:
            raise ValueError("star count cannot be negative")


def _header(headers: Mapping[str, str], name: str) -> str | None:
    lowered = name.lower()
    for key, value in headers.items():
        if key.lower() == lowered:
            return value
    return None


def _quota(headers: Mapping[str, str]) -> tuple[int, float] | None:
    remaining = _header(headers, "X-RateLimit-Remaining")
    reset = _header(headers, "X-RateLimit-Reset")
    if remaining is None or reset is None:
        return None
    return int(remaining), float(reset)


@dataclass(frozen=True)
class Throttle:
    """Wait policy applied after every response."""

    page_delay: float = 0.0
    repo_delay: float = 1.0
    threshold: int = 0  # remaining quota at or below this counts as exhausted
    legacy: bool = False  # fixed pause after every request, as the original scripts did

    def wait(self, headers: Mapping[str, str], now: float, between: str = "page") -> float:
        if self.legacy:
            return LEGACY_PAUSE
        quota = _quota(headers)
        if quota is not None and quota[0] <= self.threshold:
            return max(0.0, quota[1] - now + 1.0)
        return self.repo_delay if between == "repo" else self.page_delay


def throttle(headers: Mapping[str, str], now: float | None = None, legacy: bool = False,
             between: str = "page") -> float:
    return Throttle(legacy=legacy).wait(headers, time.time() if now is None else now, between)


# --- recorded HTTP fixtures -----------------------------------------------------

def request_key(url: str, params: Mapping[str, Any] | None) -> str:
    path = url.split("://", 1)[-1].split("/", 1)[-1]
    query = urlencode(sorted((k, str(v)) for k, v in (params or {}).items()))
    return f"/{path}?{query}" if query else f"/{path}"


class ReplayResponse:
    def __init__(self, status: int, headers: Mapping[str, str], body: Any):
        self.status_code = status
        self.headers = dict(headers)
        self._body = body

    def json(self) -> Any:
        return self._body


class ReplaySession:
    """Serves recorded responses keyed by path plus sorted query parameters.

    A fixture maps each key to one response or a list of responses played in
    order (the last one repeats). ``{"error": "..."}`` raises a transport error.
    """

    def __init__(self, fixtures: Mapping[str, Any]):
        self.fixtures = dict(fixtures)
        self.calls: list[str] = []
        self._served: dict[str, int] = {}

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplaySession":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def get(self, url: str, params=None, headers=None, timeout=None) -> ReplayResponse:
        key = request_key(url, params)
        self.calls.append(key)
        if key not in self.fixtures:
            return ReplayResponse(404, {}, {"message": "Not Found"})
        entry = self.fixtures[key]
        if isinstance(entry, list):
            k = self._served.get(key, 0)
            self._served[key] = k + 1
            entry = entry[min(k, len(entry) - 1)]
        if "error" in entry:
            raise requests.ConnectionError(entry["error"])
        return ReplayResponse(entry.get("status", 200), entry.get("headers", {}), entry.get("body"))


# --- client -------------------------------------------------------------------------

class GitHubClient:
    def __init__(self, session=None, token: str | None = None, throttle: Throttle = Throttle(),
                 sleep: Callable[[float], None] = time.sleep, clock: Callable[[], float] = time.time,
                 max_wait: float = 3600.0, retries: int = 3, api_root: str = API_ROOT):
        self.session = session if session is not None else requests.Session()
        self.token = token
        self.throttle = throttle
        self.sleep = sleep
        self.clock = clock
        self.max_wait = max_wait
        self.retries = retries
        self.api_root = api_root.rstrip("/")
        self.pending_wait = 0.0
        self.waits: list[float] = []

    def _headers(self) -> dict[str, str]:
        h = {"Accept": "application/vnd.github+json", "User-Agent": "wontfix-miner"}
        if self.token:
            h["Authorization"] = f"Bearer {self.token}"
        return h

    def _pause(self, seconds: float) -> None:
        if seconds > 0:
            self.waits.append(seconds)
            self.sleep(seconds)

    def defer(self, seconds: float) -> None:
        """Require at least ``seconds`` of quiet before the next request."""
        self.pending_wait = max(self.pending_wait, seconds)

    def get(self, path: str, params: Mapping[str, Any] | None = None) -> Any:
        url = f"{self.api_root}/{path.lstrip('/')}"
        failures = 0
        while True:
            self._pause(self.pending_wait)
            self.pending_wait = 0.0
            try:
                resp = self.session.get(url, params=dict(params or {}), headers=self._headers(),
                                        timeout=30)
            except (requests.RequestException, OSError) as exc:
                failures += 1
                if failures > self.retries:
                    raise TransportError(f"GET {path} failed: {exc}", retries=failures - 1) from None
                self.defer(2.0 ** failures)
                continue
            status = resp.status_code
            headers = resp.headers
            quota = _quota(headers)
            if status == 200:
                self.defer(self.throttle.wait(headers, self.clock()))
                return resp.json()
            if status == 404:
                raise NotFound(f"GET {path}: not found")
            if status in (403, 429) and quota is not None and quota[0] <= self.throttle.threshold:
                wait = self.throttle.wait(headers, self.clock())
                if wait > self.max_wait:
                    raise RateLimited(f"quota exhausted; reset is {wait:.0f}s away "
                                      f"(max wait {self.max_wait:.0f}s)")
                log.info("rate limited, waiting %.0fs", wait)
                self.defer(wait)
                continue
            if status in (401, 403):
                raise AuthError(f"GET {path}: HTTP {status}; check the API token")
            if status >= 500:
                failures += 1
                if failures > self.retries:
                    raise TransportError(f"GET {path}: HTTP {status}", retries=failures - 1)
                self.defer(2.0 ** failures)
                continue
            raise MinerError(f"GET {path}: unexpected HTTP {status}")

    def paged(self, path: str, params: Mapping[str, Any] | None = None,
              start_page: int = 1) -> Iterable[tuple[int, list]]:
        """Yield (page number, items) until a short page."""
        page = start_page
        while True:
            body = self.get(path, {**(params or {}), "per_page": PAGE_SIZE, "page": page})
            items = body.get("items", []) if isinstance(body, dict) else body
            yield page, items
            if len(items) < PAGE_SIZE:
                return
            page += 1


# --- extraction ---------------------------------------------------------------------

def discover_repos(client: GitHubClient, language: str, top_n: int) -> list[RepoRef]:
    """The ``top_n`` most-starred repositories in ``language``, minus those without labels."""
    if top_n < 1:
        raise ValueError("top_n must be at least 1")
    found: list[RepoRef] = []
    params = {"q": f"language:{language}", "sort": "stars", "order": "desc"}
    for _, items in client.paged("search/repositories", params):
        for item in items:
            found.append(RepoRef(item["full_name"], int(item["stargazers_count"]),
                                 item.get("language") or language))
        if len(found) >= top_n:
            break
    kept = []
    for repo in found[:top_n]:
        if client.get(f"repos/{repo.full_name}/labels", {"per_page": 1}):
            kept.append(repo)
        else:
            log.info("skipping %s: no issue labels", repo.full_name)
    return kept


def _login(user: Mapping | None) -> str:
    return (user or {}).get("login") or GHOST


def fetch_comments(client: GitHubClient, repo: str, number: int) -> list[CommentRecord]:
    out = []
    for _, items in client.paged(f"repos/{repo}/issues/{number}/comments"):
        out.extend(CommentRecord(_login(c.get("user")), parse_timestamp(c["created_at"]),
                                 c.get("body") or "") for c in items)
    return out


def issue_record(repo: str, raw: Mapping, comments: Iterable[CommentRecord]) -> IssueRecord:
    notes = []
    if raw.get("locked"):
        notes.append(f"locked ({raw.get('active_lock_reason') or 'no reason given'})")
    record = IssueRecord(
        id=f"{repo}#{raw['number']}",
        repo=repo,
        url=raw.get("html_url") or raw.get("url") or "",
        title=raw.get("title") or "",
        body=raw.get("body") or "",
        state=raw["state"],
        raw_labels=tuple(lab["name"] if isinstance(lab, dict) else str(lab)
                         for lab in raw.get("labels", ())),
        created_at=parse_timestamp(raw["created_at"]),
        closed_at=parse_timestamp(raw["closed_at"]) if raw.get("closed_at") else None,
        author=_login(raw.get("user")),
        author_role=ROLE_OF_ASSOCIATION.get(raw.get("author_association", ""), "outsider"),
        comments=tuple(comments),
        provenance="; ".join(notes) or None,
    )
    # round-trip through the schema validator so bad upstream data fails loudly here
    issue_from_json(issue_to_json(record))
    return record


def _is_closed_issue(raw: Mapping) -> bool:
    return "pull_request" not in raw and raw.get("state") == "closed"


def wontfix_label_names(client: GitHubClient, repo: str) -> list[str]:
    names = []
    for _, items in client.paged(f"repos/{repo}/labels"):
        names.extend(lab["name"] for lab in items if normalize_wontfix_label(lab["name"]))
    return names


def fetch_closed_issues(client: GitHubClient, repo: str, with_comments: bool = True,
                        seen: set[str] | None = None) -> list[IssueRecord]:
    """Every closed issue of ``repo``, plus a second pass per wontfix label."""
    seen = set() if seen is None else seen
    out: list[IssueRecord] = []

    def take(items):
        for raw in items:
            if not _is_closed_issue(raw):
                continue
            issue_id = f"{repo}#{raw['number']}"
            if issue_id in seen:
                continue
            seen.add(issue_id)
            comments = (fetch_comments(client, repo, raw["number"])
                        if with_comments and raw.get("comments", 0) else ())
            out.append(issue_record(repo, raw, comments))

    for _, items in client.paged(f"repos/{repo}/issues", {"state": "closed"}):
        take(items)
    for label in wontfix_label_names(client, repo):
        for _, items in client.paged(f"repos/{repo}/issues", {"state": "closed", "labels": label}):
            take(items)
    return out


# --- resumable run --------------------------------------------------------------------

def _atomic_write_json(path: Path, obj: Any) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=1, sort_keys=True)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emitted_ids(out_path: Path) -> set[str]:
    """Ids already in the output; a torn final line from a crash is cut off."""
    if not out_path.exists():
        return set()
    data = out_path.read_bytes()
    if data and not data.endswith(b"\n"):
        data = data[:data.rfind(b"\n") + 1]
        out_path.write_bytes(data)
    return {json.loads(line)["id"] for line in data.decode("utf-8").splitlines() if line.strip()}


@dataclass
class MineResult:
    repos: list[RepoRef]
    emitted: int
    skipped_duplicates: int


def mine(client: GitHubClient, language: str, top_n: int, out_path: str | Path,
         checkpoint_path: str | Path | None = None, with_comments: bool = True) -> MineResult:
    """Mine closed issues into ``out_path`` (JSONL), resuming from the checkpoint if present.

    The checkpoint records the repository list and, per repository, the phase
    and the next page to fetch; it is rewritten atomically after every page.
    """
    out_path = Path(out_path)
    ckpt_path = Path(checkpoint_path) if checkpoint_path else out_path.with_suffix(".checkpoint.json")
    state: dict[str, Any]
    if ckpt_path.exists():
        state = json.loads(ckpt_path.read_text(encoding="utf-8"))
        if state.get("version") != CHECKPOINT_VERSION:
            raise MinerError(f"{ckpt_path}: unsupported checkpoint version")
        if (state["language"], state["top_n"]) != (language, top_n):
            raise MinerError(f"{ckpt_path}: checkpoint belongs to a different query "
                             f"({state['language']}, top {state['top_n']})")
    else:
        repos = discover_repos(client, language, top_n)
        state = {"version": CHECKPOINT_VERSION, "language": language, "top_n": top_n,
                 "repos": [[r.full_name, r.stars, r.primary_language] for r in repos],
                 "cursor": {r.full_name: {"phase": "issues", "page": 1} for r in repos}}
        _atomic_write_json(ckpt_path, state)

    repos = [RepoRef(n, s, lang) for n, s, lang in state["repos"]]
    seen = _emitted_ids(out_path)
    emitted = skipped = 0

    with open(out_path, "a", encoding="utf-8") as out:
        def emit(raw_items, repo):
            nonlocal emitted, skipped
            for raw in raw_items:
                if not _is_closed_issue(raw):
                    continue
                issue_id = f"{repo}#{raw['number']}"
                if issue_id in seen:
                    skipped += 1
                    continue
                comments = (fetch_comments(client, repo, raw["number"])
                            if with_comments and raw.get("comments", 0) else ())
                record = issue_record(repo, raw, comments)
                out.write(json.dumps(issue_to_json(record), ensure_ascii=False) + "\n")
                seen.add(issue_id)
                emitted += 1
            out.flush()

        for k, repo in enumerate(repos):
            cursor = state["cursor"][repo.full_name]
            if cursor["phase"] == "done":
                continue
            if k:
                client.defer(client.throttle.wait({}, client.clock(), between="repo"))
            if cursor["phase"] == "issues":
                for page, items in client.paged(f"repos/{repo.full_name}/issues",
                                                {"state": "closed"}, start_page=cursor["page"]):
                    emit(items, repo.full_name)
                    cursor["page"] = page + 1
                    _atomic_write_json(ckpt_path, state)
                cursor.update(phase="second_pass", page=1)
                _atomic_write_json(ckpt_path, state)
            # the second pass is cheap and idempotent, so it restarts from scratch
            for label in wontfix_label_names(client, repo.full_name):
                for _, items in client.paged(f"repos/{repo.full_name}/issues",
                                             {"state": "closed", "labels": label}):
                    emit(items, repo.full_name)
            cursor.update(phase="done", page=0)
            _atomic_write_json(ckpt_path, state)

    return MineResult(repos, emitted, skipped)


def token_from_env(var: str = "GITHUB_TOKEN") -> str | None:
    return os.environ.get(var) or None


__all__ = [
    "API_ROOT", "GitHubClient", "LEGACY_PAUSE", "MineResult", "RepoRef", "ReplaySession",
    "Throttle", "discover_repos", "fetch_closed_issues", "fetch_comments", "issue_record",
    "mine", "request_key", "throttle", "token_from_env",
]
