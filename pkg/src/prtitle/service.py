"""HTTP JSON service exposing the generation pipeline (and serving the web UI)."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import httpx
from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .assembly import (
    DEFAULT_MAX_SOURCE_TOKENS,
    GenerationRequest,
    build_source_sequence,
    extract_commit_subjects,
    normalize_issue_urls,
    truncate_to_budget,
)
from .errors import InvalidRequestError, MalformedUrlError, PrTitleError
from .github import (
    DEFAULT_API_BASE,
    ApiCredentials,
    GitHubClient,
    ResourceKind,
    ResourceLocator,
    parse_url,
    to_api_url,
)
from .summarizer import BackendKind, BackendSpec, generate_title

logger = logging.getLogger(__name__)

DEFAULT_CACHE_TTL_SECONDS = 60.0

#: HTTP status for each machine-readable error code; anything absent is a 500.
STATUS_BY_CODE = {
    "invalid_request": 400,
    "malformed_url": 400,
    "not_found": 404,
    "rate_limited": 429,
    "empty_source": 422,
    "backend_unavailable": 502,
    "backend_error": 502,
    "upstream": 502,
    "network": 502,
    "decode_error": 502,
}


@dataclass(frozen=True)
class ServiceConfig:
    """Immutable service settings; shared by every request handler."""

    port: int = 8000
    backend_spec: BackendSpec = BackendSpec()
    github_base: str = DEFAULT_API_BASE
    token: str | None = None
    max_issue_urls: int = 10
    request_timeout_ms: int = 30_000
    cache_ttl_seconds: float = DEFAULT_CACHE_TTL_SECONDS
    static_dir: str | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port must be in 1..65535, got {self.port}")
        if self.max_issue_urls < 0:
            raise ValueError("max_issue_urls must be >= 0")
        if self.request_timeout_ms < 1:
            raise ValueError("request_timeout_ms must be >= 1")


@dataclass(frozen=True)
class GenerateResponse:
    """Wire shape of a successful generation."""

    title: str
    source_sequence: str
    parts: tuple[tuple[str, str], ...]
    warnings: tuple[str, ...]
    backend_id: str

    def to_json(self) -> dict:
        return {
            "title": self.title,
            "source_sequence": self.source_sequence,
            "parts": [{"kind": kind, "content": content} for kind, content in self.parts],
            "warnings": list(self.warnings),
            "backend_id": self.backend_id,
        }


class TtlCache:
    """Thread-safe mapping with per-entry expiry.

    Exists to absorb rapid duplicate submissions (e.g. double clicks) without
    masking upstream changes for long; the clock is injectable for tests.
    """

    def __init__(
        self,
        ttl_seconds: float = DEFAULT_CACHE_TTL_SECONDS,
        clock: Callable[[], float] = time.monotonic,
    ):
        self._ttl = ttl_seconds
        self._clock = clock
        self._lock = threading.Lock()
        self._entries: dict[str, tuple[float, Any]] = {}

    def get(self, key: str) -> Any | None:
        now = self._clock()
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            expires_at, value = entry
            if now >= expires_at:
                del self._entries[key]
                return None
            return value

    def put(self, key: str, value: Any) -> None:
        with self._lock:
            self._entries[key] = (self._clock() + self._ttl, value)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


def _cached(
    cache: TtlCache | None, key: str, producer: Callable[[], Any]
) -> Any:
    if cache is None:
        return producer()
    hit = cache.get(key)
    if hit is not None:
        return hit
    value = producer()
    cache.put(key, value)
    return value


def run_generation(
    request: GenerationRequest,
    client: GitHubClient,
    config: ServiceConfig,
    cache: TtlCache | None = None,
) -> GenerateResponse:
    """Execute the full pipeline for one request.

    The PR URL must name a compare view or a pull request; issue URLs beyond
    ``config.max_issue_urls`` are ignored with a warning, and any failure to
    fetch a single issue degrades to a warning rather than failing the whole
    request — a pull request does not have to reference an issue at all.
    """
    locator = parse_url(request.pr_url)
    if locator.kind == ResourceKind.ISSUE:
        raise MalformedUrlError("pr_url must be a compare or pull-request URL, not an issue")
    warnings: list[str] = []
    description = request.description

    if locator.kind == ResourceKind.COMPARE:
        commits = _cached(
            cache,
            to_api_url(locator, config.github_base),
            lambda: client.fetch_compare_commits(locator),
        )
    else:
        details = _cached(
            cache,
            to_api_url(locator, config.github_base),
            lambda: client.fetch_pull_request(locator),
        )
        commits = details.commits
        if description is None or not description.strip():
            description = details.description

    issue_urls = normalize_issue_urls(request.issue_urls)
    if len(issue_urls) > config.max_issue_urls:
        warnings.append(
            f"using the first {config.max_issue_urls} of {len(issue_urls)} issue URLs"
        )
        issue_urls = issue_urls[: config.max_issue_urls]
    issue_titles: list[str] = []
    for url in issue_urls:
        try:
            issue_locator = _issue_locator(url)
            issue = _cached(
                cache,
                to_api_url(issue_locator, config.github_base),
                lambda loc=issue_locator: client.fetch_issue(loc),
            )
        except PrTitleError as exc:
            warnings.append(f"skipped issue {url}: {exc}")
            continue
        issue_titles.append(issue.title)

    sequence = build_source_sequence(
        description=description,
        commit_subjects=extract_commit_subjects(commits),
        issue_titles=issue_titles,
    )
    sequence = truncate_to_budget(sequence, DEFAULT_MAX_SOURCE_TOKENS)
    suggestion = generate_title(sequence, config.backend_spec)
    return GenerateResponse(
        title=suggestion.title,
        source_sequence=sequence.text,
        parts=tuple((part.kind.value, part.content) for part in sequence.parts),
        warnings=tuple(warnings),
        backend_id=suggestion.backend_id,
    )


def _issue_locator(url: str) -> ResourceLocator:
    locator = parse_url(url)
    if locator.kind != ResourceKind.ISSUE:
        raise MalformedUrlError(f"not an issue URL: {url}")
    return locator


def parse_generate_payload(payload: Any) -> GenerationRequest:
    """Validate the /api/generate body and build a GenerationRequest."""
    if not isinstance(payload, dict):
        raise InvalidRequestError("request body must be a JSON object")
    pr_url = payload.get("pr_url")
    if not isinstance(pr_url, str) or not pr_url.strip():
        raise MalformedUrlError("the pr_url field is required")
    issue_urls = payload.get("issue_urls", [])
    if not isinstance(issue_urls, list) or not all(
        isinstance(url, str) for url in issue_urls
    ):
        raise InvalidRequestError("issue_urls must be a list of strings")
    description = payload.get("description")
    if description is not None and not isinstance(description, str):
        raise InvalidRequestError("description must be a string when present")
    return GenerationRequest(
        pr_url=pr_url.strip(),
        issue_urls=tuple(issue_urls),
        description=description,
    )


def _error_response(exc: PrTitleError) -> JSONResponse:
    status = STATUS_BY_CODE.get(exc.code, 500)
    return JSONResponse(
        status_code=status, content={"error": exc.code, "detail": str(exc)}
    )


def probe_endpoint(endpoint: str, timeout: float = 2.0) -> bool:
    """True when the endpoint answers anything at all (even an HTTP error)."""
    try:
        httpx.get(endpoint, timeout=timeout)
    except httpx.HTTPError:
        return False
    return True


def create_app(config: ServiceConfig, client: GitHubClient | None = None) -> FastAPI:
    """Build the FastAPI app; ``client`` is injectable for tests."""
    if client is None:
        client = GitHubClient(
            credentials=ApiCredentials(token=config.token),
            base_endpoint=config.github_base,
            timeout=config.request_timeout_ms / 1000.0,
        )
    cache = TtlCache(config.cache_ttl_seconds)
    app = FastAPI(title="PR title generation service")

    @app.post("/api/generate")
    async def api_generate(request: Request) -> JSONResponse:
        try:
            payload = await request.json()
        except ValueError:
            return _error_response(InvalidRequestError("request body must be valid JSON"))
        try:
            generation_request = parse_generate_payload(payload)
            response = await run_in_threadpool(
                run_generation, generation_request, client, config, cache
            )
        except PrTitleError as exc:
            logger.info("generation failed: [%s] %s", exc.code, exc)
            return _error_response(exc)
        return JSONResponse(response.to_json())

    @app.get("/healthz")
    def healthz() -> dict:
        reachable = True
        if config.backend_spec.kind == BackendKind.REMOTE:
            assert config.backend_spec.remote_endpoint is not None
            reachable = probe_endpoint(config.backend_spec.remote_endpoint)
        return {
            "status": "ok",
            "backend": config.backend_spec.kind.value,
            "backend_reachable": reachable,
        }

    if config.static_dir is not None and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
