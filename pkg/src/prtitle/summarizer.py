"""Title generation backends: built-in extractive and remote HTTP."""

from __future__ import annotations

import re
import time
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import httpx

from .assembly import SourceSequence
from .errors import BackendError, BackendUnavailableError, EmptySourceError
from .rouge import token_prefix, tokenize

DEFAULT_MAX_TITLE_TOKENS = 12
DEFAULT_TIMEOUT_MS = 30_000

_WHITESPACE_RUN_RE = re.compile(r"\s+")
_TRAILING_PUNCT = ".;:,"


class BackendKind(str, Enum):
    EXTRACTIVE = "extractive"
    REMOTE = "remote"


@dataclass(frozen=True)
class BackendSpec:
    """Configuration for a title-generation backend.

    ``remote_endpoint`` is required when ``kind`` is remote and ignored
    otherwise.  ``max_title_tokens`` bounds the generated title length in
    tokens; ``timeout_ms`` bounds the remote round trip.
    """

    kind: BackendKind = BackendKind.EXTRACTIVE
    remote_endpoint: str | None = None
    max_title_tokens: int = DEFAULT_MAX_TITLE_TOKENS
    timeout_ms: int = DEFAULT_TIMEOUT_MS

    def __post_init__(self) -> None:
        if self.kind == BackendKind.REMOTE and not self.remote_endpoint:
            raise ValueError("remote backend requires remote_endpoint")
        if self.max_title_tokens < 1:
            raise ValueError("max_title_tokens must be >= 1")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be >= 1")


@dataclass(frozen=True)
class TitleSuggestion:
    """A generated title plus which backend produced it and how long it took."""

    title: str
    backend_id: str
    elapsed_ms: int

    def __post_init__(self) -> None:
        if not self.title:
            raise ValueError("title must be non-empty")
        if "\n" in self.title or "\r" in self.title:
            raise ValueError("title must be a single line")
        if self.title != self.title.strip():
            raise ValueError("title must not have surrounding whitespace")
        if self.elapsed_ms < 0:
            raise ValueError("elapsed_ms must be non-negative")


def clean_title(text: str) -> str:
    """Normalize a candidate title.

    Whitespace runs (including newlines) collapse to single spaces and the
    result is stripped.  Trailing ``.;:,`` punctuation is removed unless doing
    so would leave nothing, in which case the punctuation survives.
    """
    collapsed = _WHITESPACE_RUN_RE.sub(" ", text).strip()
    stripped = collapsed.rstrip(_TRAILING_PUNCT).rstrip()
    return stripped if stripped else collapsed


def extractive_generate(
    sequence: SourceSequence, max_title_tokens: int = DEFAULT_MAX_TITLE_TOKENS
) -> str:
    """Pick the source part closest to the token-frequency centroid.

    Each part is scored by summing, over its *distinct* tokens, the number of
    times that token occurs across the whole sequence.  The highest-scoring
    part wins; ties break toward the earliest part.  The winner is truncated
    to ``max_title_tokens`` tokens and normalized.
    """
    if not sequence.parts:
        raise EmptySourceError("source sequence has no parts")
    corpus: Counter[str] = Counter()
    part_tokens: list[list[str]] = []
    for part in sequence.parts:
        tokens = tokenize(part.content)
        part_tokens.append(tokens)
        corpus.update(tokens)

    def score(index: int) -> int:
        return sum(corpus[token] for token in set(part_tokens[index]))

    best = max(range(len(sequence.parts)), key=score)
    candidate = token_prefix(sequence.parts[best].content, max_title_tokens)
    title = clean_title(candidate)
    if not title:
        raise EmptySourceError("winning part has no usable text")
    return title


def remote_generate(sequence: SourceSequence, spec: BackendSpec) -> str:
    """POST the source to a remote generation endpoint and return its title.

    The request body is ``{"source": ..., "max_length": ...}`` and a
    successful response is ``{"title": ...}`` with status 200.  Connection
    and timeout failures raise :class:`BackendUnavailableError`; any other
    status, a non-JSON body, or a missing/empty title raises
    :class:`BackendError`.  The returned title is re-truncated locally so a
    misbehaving backend cannot exceed the token budget.
    """
    assert spec.remote_endpoint is not None
    payload = {"source": sequence.text, "max_length": spec.max_title_tokens}
    try:
        response = httpx.post(
            spec.remote_endpoint, json=payload, timeout=spec.timeout_ms / 1000.0
        )
    except (httpx.ConnectError, httpx.TimeoutException) as exc:
        raise BackendUnavailableError(f"backend unreachable: {exc}") from exc
    except httpx.HTTPError as exc:
        raise BackendUnavailableError(f"backend request failed: {exc}") from exc
    if response.status_code != 200:
        raise BackendError(
            f"backend returned status {response.status_code}"
        )
    try:
        body = response.json()
    except ValueError as exc:
        raise BackendError("backend response is not valid JSON") from exc
    if not isinstance(body, dict) or not isinstance(body.get("title"), str):
        raise BackendError("backend response missing string 'title'")
    title = clean_title(token_prefix(clean_title(body["title"]), spec.max_title_tokens))
    if not title:
        raise BackendError("backend returned an empty title")
    return title


def generate_title(sequence: SourceSequence, spec: BackendSpec) -> TitleSuggestion:
    """Generate a title for ``sequence`` using the backend ``spec`` selects."""
    start = time.perf_counter()
    if spec.kind == BackendKind.REMOTE:
        title = remote_generate(sequence, spec)
    else:
        title = extractive_generate(sequence, spec.max_title_tokens)
    elapsed_ms = int((time.perf_counter() - start) * 1000.0)
    return TitleSuggestion(
        title=title, backend_id=spec.kind.value, elapsed_ms=elapsed_ms
    )
