"""GitHub URL handling and REST API access.

User-facing ``github.com`` links are parsed into structured locators, rewritten
into ``api.github.com/repos`` request URLs, and fetched over the REST v3 JSON
API. The API origin is a constructor parameter so tests can point the client at
a local mock server.
"""

from __future__ import annotations

import logging
import os
import re
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterator, Mapping
from urllib.parse import urlparse

import httpx

from .errors import (
    DecodeError,
    MalformedUrlError,
    NetworkError,
    NotFoundError,
    RateLimitedError,
    UpstreamError,
)

logger = logging.getLogger(__name__)

DEFAULT_API_BASE = "https://api.github.com"
GITHUB_HOST = "github.com"
PAGE_SIZE = 100

_SHA_RE = re.compile(r"^[0-9a-f]{40}$")
_REPO_FIELD_RE = re.compile(r"^[^\s/]+$")

# GitHub's closing keywords: "Closes #1", "fixed #2", "Resolve #3", ...
_LINKED_ISSUE_RE = re.compile(r"(?:close[sd]?|fix(?:e[sd])?|resolve[sd]?)\s+#(\d+)", re.IGNORECASE)


class ResourceKind(str, Enum):
    COMPARE = "compare"
    PULL_REQUEST = "pull_request"
    ISSUE = "issue"


@dataclass(frozen=True)
class RepoRef:
    """A repository identified by owner and name."""

    owner: str
    name: str

    def __post_init__(self):
        for label, value in (("owner", self.owner), ("name", self.name)):
            if not value or not _REPO_FIELD_RE.match(value):
                raise ValueError(f"repo {label} must be non-empty without '/' or whitespace: {value!r}")

    @property
    def full_name(self) -> str:
        return f"{self.owner}/{self.name}"


@dataclass(frozen=True)
class ResourceLocator:
    """A classified GitHub URL: branch comparison, pull request, or issue.

    Exactly the fields implied by ``kind`` are set: ``compare_spec`` for
    COMPARE (and it always contains the literal "..."), ``number`` for
    PULL_REQUEST and ISSUE.
    """

    kind: ResourceKind
    repo: RepoRef
    compare_spec: str | None = None
    number: int | None = None

    def __post_init__(self):
        if self.kind is ResourceKind.COMPARE:
            if not self.compare_spec or self.number is not None:
                raise ValueError("compare locator needs compare_spec and no number")
            if "..." not in self.compare_spec:
                raise ValueError(f"compare spec must contain '...': {self.compare_spec!r}")
        else:
            if self.compare_spec is not None or self.number is None:
                raise ValueError(f"{self.kind.value} locator needs number and no compare_spec")
            if self.number < 1:
                raise ValueError(f"number must be positive, got {self.number}")


@dataclass(frozen=True)
class CommitRecord:
    """One commit: 40-hex sha plus the full (possibly multi-line) message."""

    sha: str
    message: str

    def __post_init__(self):
        if not _SHA_RE.match(self.sha):
            raise ValueError(f"sha must be 40 lowercase hex chars: {self.sha!r}")


@dataclass(frozen=True)
class IssueRecord:
    number: int
    title: str

    def __post_init__(self):
        if self.number < 1:
            raise ValueError(f"issue number must be positive, got {self.number}")


@dataclass(frozen=True)
class PullRequestDetails:
    """PR body (when present), its commits, and issue numbers linked via closing keywords."""

    description: str | None
    commits: tuple[CommitRecord, ...]
    linked_issue_numbers: tuple[int, ...]


@dataclass(frozen=True)
class PullRequestSummary:
    """One entry from a repository's pull-request listing."""

    number: int
    title: str
    description: str | None
    created_at: datetime
    author: str | None


@dataclass(frozen=True, repr=False)
class ApiCredentials:
    """Optional bearer token; the repr is redacted so it can never leak into logs."""

    token: str | None = None

    def __repr__(self) -> str:
        state = "set" if self.token else "unset"
        return f"ApiCredentials(token=<{state}>)"

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "ApiCredentials":
        env = os.environ if env is None else env
        return cls(token=env.get("GITHUB_TOKEN") or None)


def parse_url(url: str) -> ResourceLocator:
    """Classify a ``github.com`` URL as a compare, pull-request, or issue link.

    Raises:
        MalformedUrlError: wrong scheme or host, unrecognized path shape,
            non-numeric or non-positive number, or an empty/invalid compare spec.
    """
    parsed = urlparse(url.strip())
    if parsed.scheme != "https":
        raise MalformedUrlError(f"expected an absolute https URL, got {url!r}")
    if parsed.netloc.lower() != GITHUB_HOST:
        raise MalformedUrlError(f"host must be exactly {GITHUB_HOST!r}, got {parsed.netloc!r}")

    path = parsed.path.strip("/")
    head = path.split("/", 3)
    if len(head) != 4:
        raise MalformedUrlError(f"unrecognized GitHub path: {parsed.path!r}")
    owner, name, resource, rest = head
    try:
        repo = RepoRef(owner, name)
    except ValueError as exc:
        raise MalformedUrlError(str(exc)) from exc

    if resource == "compare":
        try:
            return ResourceLocator(ResourceKind.COMPARE, repo, compare_spec=rest)
        except ValueError as exc:
            raise MalformedUrlError(str(exc)) from exc
    if resource in ("pull", "issues"):
        if not rest.isdigit() or int(rest) < 1:
            raise MalformedUrlError(f"expected a positive number, got {rest!r}")
        kind = ResourceKind.PULL_REQUEST if resource == "pull" else ResourceKind.ISSUE
        return ResourceLocator(kind, repo, number=int(rest))
    raise MalformedUrlError(f"unrecognized GitHub resource {resource!r} in {url!r}")


def to_web_url(locator: ResourceLocator) -> str:
    """Render the canonical ``github.com`` URL for a locator."""
    base = f"https://{GITHUB_HOST}/{locator.repo.full_name}"
    if locator.kind is ResourceKind.COMPARE:
        return f"{base}/compare/{locator.compare_spec}"
    if locator.kind is ResourceKind.PULL_REQUEST:
        return f"{base}/pull/{locator.number}"
    return f"{base}/issues/{locator.number}"


def to_api_url(locator: ResourceLocator, api_base: str = DEFAULT_API_BASE) -> str:
    """Rewrite a locator into its REST request URL under ``{api_base}/repos``.

    Pull-request pages map to the ``/pulls/{n}`` REST resource (the web path
    uses the singular "pull", the API does not).
    """
    base = f"{api_base.rstrip('/')}/repos/{locator.repo.full_name}"
    if locator.kind is ResourceKind.COMPARE:
        return f"{base}/compare/{locator.compare_spec}"
    if locator.kind is ResourceKind.PULL_REQUEST:
        return f"{base}/pulls/{locator.number}"
    return f"{base}/issues/{locator.number}"


def extract_linked_issue_numbers(body: str | None) -> list[int]:
    """Issue numbers referenced via closing keywords in a PR body, deduped in order."""
    if not body:
        return []
    seen: dict[int, None] = {}
    for match in _LINKED_ISSUE_RE.finditer(body):
        seen.setdefault(int(match.group(1)))
    return list(seen)


def _require_kind(locator: ResourceLocator, kind: ResourceKind) -> None:
    if locator.kind is not kind:
        raise ValueError(f"expected a {kind.value} locator, got {locator.kind.value}")


class GitHubClient:
    """Blocking REST client for the endpoints this tool needs.

    Immutable after construction and safe to share across threads. Every
    request carries ``Accept: application/vnd.github+json`` and, when
    credentials hold a token, a bearer Authorization header.

    Retry policy: one retry with a fixed backoff on connection failures and
    5xx responses. Rate limits (403/429) are surfaced as RateLimitedError and
    never retried silently.
    """

    def __init__(
        self,
        credentials: ApiCredentials | None = None,
        base_endpoint: str = DEFAULT_API_BASE,
        timeout: float = 30.0,
        retry_backoff: float = 1.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_endpoint = base_endpoint.rstrip("/")
        self._retry_backoff = retry_backoff
        headers = {"Accept": "application/vnd.github+json"}
        if credentials and credentials.token:
            headers["Authorization"] = f"Bearer {credentials.token}"
        self._http = httpx.Client(headers=headers, timeout=timeout, transport=transport)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "GitHubClient":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # -- request plumbing -------------------------------------------------

    def _get(self, url: str, params: dict[str, Any] | None = None) -> httpx.Response:
        attempts = 2
        for attempt in range(1, attempts + 1):
            try:
                response = self._http.get(url, params=params)
            except httpx.RequestError as exc:
                if attempt == attempts:
                    raise NetworkError(f"request to {url} failed: {exc}") from exc
                logger.warning("network error on %s, retrying once: %s", url, exc)
                time.sleep(self._retry_backoff)
                continue
            if response.status_code >= 500:
                if attempt == attempts:
                    raise UpstreamError(f"GET {url} returned {response.status_code}")
                logger.warning("GET %s returned %s, retrying once", url, response.status_code)
                time.sleep(self._retry_backoff)
                continue
            return self._check_status(response, url)
        raise AssertionError("unreachable")

    @staticmethod
    def _check_status(response: httpx.Response, url: str) -> httpx.Response:
        if response.status_code == 404:
            raise NotFoundError(f"GET {url} returned 404")
        if response.status_code in (403, 429):
            retry_after = response.headers.get("Retry-After")
            hint = float(retry_after) if retry_after and retry_after.replace(".", "", 1).isdigit() else None
            raise RateLimitedError(f"GET {url} rate limited ({response.status_code})", retry_after=hint)
        if response.status_code != 200:
            raise UpstreamError(f"GET {url} returned unexpected status {response.status_code}")
        return response

    def _get_json(self, url: str, params: dict[str, Any] | None = None) -> Any:
        response = self._get(url, params=params)
        try:
            return response.json()
        except ValueError as exc:
            raise DecodeError(f"GET {url} returned a non-JSON body") from exc

    def _api_url(self, locator: ResourceLocator) -> str:
        return to_api_url(locator, api_base=self.base_endpoint)

    def _repo_url(self, repo: RepoRef, suffix: str) -> str:
        return f"{self.base_endpoint}/repos/{repo.full_name}{suffix}"

    # -- payload parsing ---------------------------------------------------

    @staticmethod
    def _parse_commit(entry: Any) -> CommitRecord:
        try:
            return CommitRecord(sha=entry["sha"], message=entry["commit"]["message"] or "")
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DecodeError(f"malformed commit entry: {exc}") from exc

    # -- fetch operations --------------------------------------------------

    def fetch_compare_commits(self, locator: ResourceLocator) -> list[CommitRecord]:
        """All commits of a branch comparison, in payload order, paginated to exhaustion."""
        _require_kind(locator, ResourceKind.COMPARE)
        url = self._api_url(locator)
        commits: list[CommitRecord] = []
        for page in self._paginate(url, key="commits"):
            commits.extend(self._parse_commit(entry) for entry in page)
        return commits

    def fetch_issue(self, locator: ResourceLocator) -> IssueRecord:
        """Number and title of a single issue."""
        _require_kind(locator, ResourceKind.ISSUE)
        url = self._api_url(locator)
        payload = self._get_json(url)
        try:
            return IssueRecord(number=int(payload["number"]), title=str(payload["title"]).strip())
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DecodeError(f"issue payload from {url} is malformed: {exc}") from exc

    def fetch_pull_request(self, locator: ResourceLocator) -> PullRequestDetails:
        """Body, commits, and closing-keyword issue links of an existing pull request."""
        _require_kind(locator, ResourceKind.PULL_REQUEST)
        url = self._api_url(locator)
        payload = self._get_json(url)
        if not isinstance(payload, dict):
            raise DecodeError(f"pull request payload from {url} is not an object")
        body = payload.get("body")
        if body is not None and not isinstance(body, str):
            raise DecodeError(f"pull request body from {url} is not text")
        description = body.strip() if body and body.strip() else None
        assert locator.number is not None
        commits = self.fetch_pull_request_commits(locator.repo, locator.number)
        return PullRequestDetails(
            description=description,
            commits=tuple(commits),
            linked_issue_numbers=tuple(extract_linked_issue_numbers(body)),
        )

    def fetch_pull_request_commits(self, repo: RepoRef, number: int) -> list[CommitRecord]:
        """Commits of one pull request, paginated to exhaustion."""
        url = self._repo_url(repo, f"/pulls/{number}/commits")
        commits: list[CommitRecord] = []
        for page in self._paginate(url):
            commits.extend(self._parse_commit(entry) for entry in page)
        return commits

    def list_pull_requests(self, repo: RepoRef, state: str = "all") -> Iterator[PullRequestSummary]:
        """Yield every pull request of a repository, newest first, paginated."""
        url = self._repo_url(repo, "/pulls")
        for page in self._paginate(url, extra_params={"state": state}):
            for entry in page:
                yield self._parse_pull_summary(entry, url)

    @staticmethod
    def _parse_pull_summary(entry: Any, url: str) -> PullRequestSummary:
        try:
            created = _parse_timestamp(entry["created_at"])
            body = entry.get("body")
            user = entry.get("user") or {}
            return PullRequestSummary(
                number=int(entry["number"]),
                title=str(entry["title"]),
                description=body if isinstance(body, str) and body.strip() else None,
                created_at=created,
                author=user.get("login") if isinstance(user, dict) else None,
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DecodeError(f"pull request listing from {url} is malformed: {exc}") from exc

    def search_repositories(self, query: str, sort: str, limit: int = 100) -> list[RepoRef]:
        """Top repositories for a search query, at most one page of ``limit`` items."""
        url = f"{self.base_endpoint}/search/repositories"
        payload = self._get_json(url, params={"q": query, "sort": sort, "order": "desc", "per_page": limit})
        try:
            items = payload["items"]
            refs = []
            for item in items:
                owner, _, name = str(item["full_name"]).partition("/")
                refs.append(RepoRef(owner, name))
            return refs
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DecodeError(f"search payload from {url} is malformed: {exc}") from exc

    def _paginate(
        self,
        url: str,
        key: str | None = None,
        extra_params: dict[str, Any] | None = None,
    ) -> Iterator[list[Any]]:
        """Yield list pages of ``PAGE_SIZE`` until a short page signals exhaustion.

        When ``key`` is given the payload is an object holding the list under
        that key (the compare endpoint); otherwise the payload is the list.
        """
        page = 1
        while True:
            params = {"per_page": PAGE_SIZE, "page": page}
            if extra_params:
                params.update(extra_params)
            payload = self._get_json(url, params=params)
            if key is not None:
                if not isinstance(payload, dict) or not isinstance(payload.get(key), list):
                    raise DecodeError(f"payload from {url} lacks a {key!r} array")
                items = payload[key]
            else:
                if not isinstance(payload, list):
                    raise DecodeError(f"payload from {url} is not an array")
                items = payload
            yield items
            if len(items) < PAGE_SIZE:
                return
            page += 1


def _parse_timestamp(value: Any) -> datetime:
    if not isinstance(value, str):
        raise ValueError(f"expected an ISO-8601 timestamp, got {value!r}")
    stamp = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)
