"""Source-sequence assembly: commit subjects, part ordering, and token budget."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import EmptySourceError
from .rouge import token_prefix, tokenize

if TYPE_CHECKING:
    from .github import CommitRecord

# Parts are joined by a single newline; visible, lossless, round-trippable.
PART_SEPARATOR = "\n"
DEFAULT_MAX_SOURCE_TOKENS = 1024

_MERGE_SUBJECT_RE = re.compile(r"^Merge (branch|pull request|remote-tracking branch)\b")


class PartKind(str, Enum):
    DESCRIPTION = "description"
    COMMIT = "commit"
    ISSUE_TITLE = "issue_title"


@dataclass(frozen=True)
class SourcePart:
    kind: PartKind
    content: str


@dataclass(frozen=True)
class SourceSequence:
    """Concatenated generation input, each part labeled with where it came from."""

    text: str
    parts: tuple[SourcePart, ...]
    token_count: int


@dataclass(frozen=True)
class GenerationRequest:
    """User inputs for one title generation: PR URL, issue URLs, description."""

    pr_url: str
    issue_urls: tuple[str, ...] = ()
    description: str | None = None

    def __post_init__(self):
        if not self.pr_url or not self.pr_url.strip():
            raise ValueError("pr_url must be non-empty")


def normalize_issue_urls(urls: Iterable[str]) -> list[str]:
    """Strip, drop blanks, and dedupe issue URLs while keeping first-seen order."""
    seen: dict[str, None] = {}
    for url in urls:
        url = url.strip()
        if url:
            seen.setdefault(url)
    return list(seen)


def extract_commit_subjects(commits: Sequence["CommitRecord"]) -> list[str]:
    """First line of each commit message, skipping blanks and merge boilerplate."""
    subjects = []
    for commit in commits:
        subject = commit.message.split("\n", 1)[0].strip()
        if subject and not _MERGE_SUBJECT_RE.match(subject):
            subjects.append(subject)
    return subjects


def _sequence_from_parts(parts: Sequence[SourcePart]) -> SourceSequence:
    text = PART_SEPARATOR.join(part.content for part in parts)
    return SourceSequence(text=text, parts=tuple(parts), token_count=len(tokenize(text)))


def build_source_sequence(
    description: str | None,
    commit_subjects: Iterable[str],
    issue_titles: Iterable[str],
) -> SourceSequence:
    """Concatenate description, commit subjects, and issue titles, in that order.

    Each part is trimmed; blank parts are dropped. Raises EmptySourceError when
    nothing survives.
    """
    parts: list[SourcePart] = []
    if description and description.strip():
        parts.append(SourcePart(PartKind.DESCRIPTION, description.strip()))
    for subject in commit_subjects:
        subject = subject.strip()
        if subject:
            parts.append(SourcePart(PartKind.COMMIT, subject))
    for title in issue_titles:
        title = title.strip()
        if title:
            parts.append(SourcePart(PartKind.ISSUE_TITLE, title))
    if not parts:
        raise EmptySourceError("description, commit messages, and issue titles are all empty")
    return _sequence_from_parts(parts)


def truncate_to_budget(seq: SourceSequence, max_tokens: int) -> SourceSequence:
    """Keep whole parts until the budget is hit, then tail-trim the first
    over-budget part at a token boundary so the result holds exactly
    ``max_tokens`` tokens."""
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
    if seq.token_count <= max_tokens:
        return seq
    kept: list[SourcePart] = []
    remaining = max_tokens
    for part in seq.parts:
        part_tokens = len(tokenize(part.content))
        if part_tokens <= remaining:
            kept.append(part)
            remaining -= part_tokens
            continue
        if remaining > 0:
            kept.append(SourcePart(part.kind, token_prefix(part.content, remaining)))
        break
    return _sequence_from_parts(kept)
