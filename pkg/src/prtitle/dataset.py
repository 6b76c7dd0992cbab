"""Corpus construction: repo lists, PR crawling, cleaning, and 8:1:1 splitting."""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .assembly import build_source_sequence, extract_commit_subjects
from .errors import EmptyCorpusError, EmptySourceError, PrTitleError, RateLimitedError
from .github import GitHubClient, RepoRef, ResourceKind, ResourceLocator
from .rouge import tokenize

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = datetime(2022, 1, 1, tzinfo=timezone.utc)
DEFAULT_SPLIT_RATIO = (8, 1, 1)

#: Languages whose top-starred repositories feed the candidate list, alongside
#: the language-agnostic most-starred and most-forked segments.
LANGUAGE_SEGMENTS = ("JavaScript", "Python", "Java", "C", "C++")

_BOT_SUFFIX = "[bot]"
_BOILERPLATE_TITLE_RE = re.compile(r"^(update|bump|merge)\b", re.IGNORECASE)

REASON_BOT_AUTHOR = "bot_author"
REASON_TITLE_LENGTH = "title_length"
REASON_BOILERPLATE_TITLE = "boilerplate_title"
REASON_NON_ASCII_TITLE = "non_ascii_title"
REASON_EMPTY_SOURCE = "empty_source"


@dataclass(frozen=True)
class TaggedRepo:
    """A candidate repository plus which selection list it came from."""

    repo: RepoRef
    source: str


@dataclass(frozen=True)
class PrRecord:
    """One mined pull request, ready for assembly and evaluation.

    ``author`` rides along with the generation fields because the bot
    filter needs it; it is optional so hand-built fixtures stay terse.
    """

    repo: RepoRef
    number: int
    title: str
    description: str | None
    commit_subjects: tuple[str, ...]
    linked_issue_titles: tuple[str, ...]
    created_at: datetime
    author: str | None = None

    def __post_init__(self) -> None:
        if self.number < 1:
            raise ValueError(f"PR number must be positive, got {self.number}")
        if not self.title.strip():
            raise ValueError("PR title must be non-empty")
        if self.created_at.tzinfo is None:
            raise ValueError("created_at must be timezone-aware")

    @property
    def record_id(self) -> str:
        return f"{self.repo.full_name}#{self.number}"


@dataclass(frozen=True)
class CrawlResult:
    """Everything a crawl pass produced, plus its bookkeeping."""

    records: tuple[PrRecord, ...]
    completed_repos: tuple[str, ...]
    failed_repos: tuple[str, ...]
    skipped_repos: tuple[str, ...]


@dataclass(frozen=True)
class CorpusManifest:
    """Train/validation/test bookkeeping for a serialized corpus.

    ``failed_repos`` and ``empty_repos`` are filled in by the build pipeline:
    repositories that errored during the crawl, and repositories none of whose
    pull requests survived cleaning.
    """

    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    ratio: tuple[int, int, int] = DEFAULT_SPLIT_RATIO
    failed_repos: tuple[str, ...] = ()
    empty_repos: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        sections = (set(self.train), set(self.val), set(self.test))
        if sum(len(s) for s in sections) != len(set().union(*sections)):
            raise ValueError("split sections must be pairwise disjoint")

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.val), len(self.test))

    @property
    def total(self) -> int:
        return sum(self.counts)


def dedupe_repos(segments: Iterable[Sequence[TaggedRepo]]) -> tuple[TaggedRepo, ...]:
    """Concatenate repo-list segments, keeping the first occurrence of each repo."""
    seen: set[tuple[str, str]] = set()
    unique: list[TaggedRepo] = []
    for segment in segments:
        for entry in segment:
            key = (entry.repo.owner, entry.repo.name)
            if key not in seen:
                seen.add(key)
                unique.append(entry)
    return tuple(unique)


def build_repo_list(client: GitHubClient, per_list: int = 100) -> tuple[TaggedRepo, ...]:
    """Regenerate the candidate list from live search (rankings drift daily).

    Seven segments: most-starred and most-forked regardless of language, then
    the most-starred repositories per language.  Duplicates collapse to their
    first (highest-priority) segment.
    """
    segments: list[list[TaggedRepo]] = []
    plans = [("most-starred", "stars:>1", "stars"), ("most-forked", "forks:>1", "forks")]
    plans += [
        (f"per-language:{lang}", f"language:{lang} stars:>1", "stars")
        for lang in LANGUAGE_SEGMENTS
    ]
    for source, query, sort in plans:
        refs = client.search_repositories(query, sort=sort, limit=per_list)
        segments.append([TaggedRepo(repo=ref, source=source) for ref in refs])
    return dedupe_repos(segments)


def _repo_from_full_name(full_name: str) -> RepoRef:
    owner, _, name = full_name.partition("/")
    return RepoRef(owner=owner, name=name)


def save_repo_list(repos: Sequence[TaggedRepo], path: Path | str) -> None:
    payload = {
        "repos": [
            {"full_name": entry.repo.full_name, "source": entry.source}
            for entry in repos
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_repo_list(path: Path | str) -> tuple[TaggedRepo, ...]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(
        TaggedRepo(repo=_repo_from_full_name(entry["full_name"]), source=entry["source"])
        for entry in payload["repos"]
    )


def crawl_prs(
    client: GitHubClient,
    repos: Sequence[TaggedRepo],
    cutoff: datetime = DEFAULT_CUTOFF,
    checkpoint_path: Path | str | None = None,
    max_prs_per_repo: int | None = None,
) -> CrawlResult:
    """Mine pull requests created strictly before ``cutoff``.

    Each PR is resolved to a full :class:`PrRecord` (description, commit
    subjects, linked issue titles).  Per-repo failures are recorded and the
    crawl moves on; a rate limit aborts the crawl instead, because every
    remaining repo would fail the same way — the checkpoint is persisted
    first, so a rerun resumes where this one stopped.  When
    ``checkpoint_path`` names an existing checkpoint, repos it already covers
    are skipped.
    """
    if cutoff.tzinfo is None:
        raise ValueError("cutoff must be timezone-aware")
    completed: list[str] = []
    records: list[PrRecord] = []
    failed: list[str] = []
    skipped: list[str] = []
    checkpoint = Path(checkpoint_path) if checkpoint_path is not None else None
    if checkpoint is not None and checkpoint.exists():
        state = json.loads(checkpoint.read_text(encoding="utf-8"))
        completed = list(state["completed"])
        records = [_record_from_json(entry) for entry in state["records"]]
    done = set(completed)

    for entry in repos:
        full_name = entry.repo.full_name
        if full_name in done:
            skipped.append(full_name)
            continue
        try:
            repo_records = _crawl_repo(client, entry.repo, cutoff, max_prs_per_repo)
        except RateLimitedError:
            _save_checkpoint(checkpoint, completed, records)
            raise
        except PrTitleError as exc:
            logger.warning("crawl failed for %s: %s", full_name, exc)
            failed.append(full_name)
            continue
        records.extend(repo_records)
        completed.append(full_name)
        done.add(full_name)
        _save_checkpoint(checkpoint, completed, records)

    records.sort(key=lambda record: (record.repo.full_name, record.number))
    return CrawlResult(
        records=tuple(records),
        completed_repos=tuple(completed),
        failed_repos=tuple(failed),
        skipped_repos=tuple(skipped),
    )


def _crawl_repo(
    client: GitHubClient,
    repo: RepoRef,
    cutoff: datetime,
    max_prs: int | None,
) -> list[PrRecord]:
    out: list[PrRecord] = []
    for summary in client.list_pull_requests(repo):
        if max_prs is not None and len(out) >= max_prs:
            break
        if summary.created_at >= cutoff:
            continue
        if not summary.title.strip():
            continue
        locator = ResourceLocator(
            kind=ResourceKind.PULL_REQUEST, repo=repo, number=summary.number
        )
        details = client.fetch_pull_request(locator)
        issue_titles: list[str] = []
        for issue_number in details.linked_issue_numbers:
            issue_locator = ResourceLocator(
                kind=ResourceKind.ISSUE, repo=repo, number=issue_number
            )
            try:
                issue = client.fetch_issue(issue_locator)
            except RateLimitedError:
                raise
            except PrTitleError as exc:
                logger.warning(
                    "skipping linked issue #%d of %s#%d: %s",
                    issue_number,
                    repo.full_name,
                    summary.number,
                    exc,
                )
                continue
            issue_titles.append(issue.title)
        out.append(
            PrRecord(
                repo=repo,
                number=summary.number,
                title=summary.title.strip(),
                description=details.description,
                commit_subjects=tuple(extract_commit_subjects(details.commits)),
                linked_issue_titles=tuple(issue_titles),
                created_at=summary.created_at,
                author=summary.author,
            )
        )
    return out


def _save_checkpoint(
    path: Path | None, completed: Sequence[str], records: Sequence[PrRecord]
) -> None:
    if path is None:
        return
    state = {
        "completed": list(completed),
        "records": [_record_to_json(record) for record in records],
    }
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(state), encoding="utf-8")
    tmp.replace(path)


def clean(
    records: Iterable[PrRecord],
) -> tuple[list[PrRecord], list[tuple[str, str]]]:
    """Apply the cleaning filters; return (kept, dropped-with-reason).

    Filters, in order: bot authors, out-of-range title token length (<2 or
    >20), short boilerplate titles (update/bump/merge with ≤3 tokens), titles
    that are mostly non-ASCII, and records whose source sequence would be
    empty.  The first matching filter names the drop reason.
    """
    kept: list[PrRecord] = []
    dropped: list[tuple[str, str]] = []
    for record in records:
        reason = drop_reason(record)
        if reason is None:
            kept.append(record)
        else:
            dropped.append((record.record_id, reason))
    return kept, dropped


def drop_reason(record: PrRecord) -> str | None:
    if record.author is not None and record.author.endswith(_BOT_SUFFIX):
        return REASON_BOT_AUTHOR
    title_tokens = len(tokenize(record.title))
    if title_tokens < 2 or title_tokens > 20:
        return REASON_TITLE_LENGTH
    if title_tokens <= 3 and _BOILERPLATE_TITLE_RE.match(record.title.strip()):
        return REASON_BOILERPLATE_TITLE
    if _non_ascii_ratio(record.title) > 0.5:
        return REASON_NON_ASCII_TITLE
    try:
        build_source_sequence(
            description=record.description,
            commit_subjects=record.commit_subjects,
            issue_titles=record.linked_issue_titles,
        )
    except EmptySourceError:
        return REASON_EMPTY_SOURCE
    return None


def _non_ascii_ratio(text: str) -> float:
    stripped = text.strip()
    if not stripped:
        return 0.0
    return sum(1 for ch in stripped if ord(ch) > 127) / len(stripped)


def split(
    records: Sequence[PrRecord],
    seed: int,
    ratio: tuple[int, int, int] = DEFAULT_SPLIT_RATIO,
) -> CorpusManifest:
    """Deterministically partition records into train/val/test.

    Record ids are sorted, shuffled by a PRNG seeded with ``seed``, and dealt
    out train-first: with N records and ratio (8, 1, 1), the validation and
    test sections each take floor(N/10) and training takes the remainder.
    """
    if not records:
        raise EmptyCorpusError("cannot split an empty corpus")
    ids = [record.record_id for record in records]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate record ids in corpus")
    ids.sort()
    random.Random(seed).shuffle(ids)
    total_weight = sum(ratio)
    n = len(ids)
    n_val = n * ratio[1] // total_weight
    n_test = n * ratio[2] // total_weight
    n_train = n - n_val - n_test
    return CorpusManifest(
        train=tuple(ids[:n_train]),
        val=tuple(ids[n_train : n_train + n_val]),
        test=tuple(ids[n_train + n_val :]),
        seed=seed,
        ratio=ratio,
    )


def _record_to_json(record: PrRecord) -> dict:
    payload: dict = {
        "repo": record.repo.full_name,
        "number": record.number,
        "title": record.title,
        "commit_subjects": list(record.commit_subjects),
        "linked_issue_titles": list(record.linked_issue_titles),
        "created_at": record.created_at.isoformat(),
    }
    if record.description is not None:
        payload["description"] = record.description
    if record.author is not None:
        payload["author"] = record.author
    return payload


def _record_from_json(payload: dict) -> PrRecord:
    return PrRecord(
        repo=_repo_from_full_name(payload["repo"]),
        number=payload["number"],
        title=payload["title"],
        description=payload.get("description"),
        commit_subjects=tuple(payload["commit_subjects"]),
        linked_issue_titles=tuple(payload["linked_issue_titles"]),
        created_at=datetime.fromisoformat(payload["created_at"]),
        author=payload.get("author"),
    )


def save_corpus(records: Iterable[PrRecord], path: Path | str) -> None:
    """Write one JSON object per line; absent optional fields are omitted."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(_record_to_json(record), ensure_ascii=False))
            handle.write("\n")


def load_corpus(path: Path | str) -> tuple[PrRecord, ...]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                records.append(_record_from_json(json.loads(line)))
    return tuple(records)


def manifest_path_for(corpus_path: Path | str) -> Path:
    return Path(corpus_path).with_suffix(".manifest.json")


def save_manifest(manifest: CorpusManifest, path: Path | str) -> None:
    payload = {
        "train": list(manifest.train),
        "val": list(manifest.val),
        "test": list(manifest.test),
        "seed": manifest.seed,
        "ratio": list(manifest.ratio),
        "counts": list(manifest.counts),
        "failed_repos": list(manifest.failed_repos),
        "empty_repos": list(manifest.empty_repos),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_manifest(path: Path | str) -> CorpusManifest:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    manifest = CorpusManifest(
        train=tuple(payload["train"]),
        val=tuple(payload["val"]),
        test=tuple(payload["test"]),
        seed=payload["seed"],
        ratio=tuple(payload["ratio"]),
        failed_repos=tuple(payload.get("failed_repos", ())),
        empty_repos=tuple(payload.get("empty_repos", ())),
    )
    if list(manifest.counts) != list(payload["counts"]):
        raise ValueError(f"manifest counts disagree with its sections: {path}")
    return manifest


def serialize(
    records: Sequence[PrRecord], manifest: CorpusManifest, path: Path | str
) -> None:
    """Write the JSONL corpus at ``path`` and its manifest alongside it."""
    save_corpus(records, path)
    save_manifest(manifest, manifest_path_for(path))


def attach_crawl_report(
    manifest: CorpusManifest,
    crawl: CrawlResult,
    kept: Sequence[PrRecord],
) -> CorpusManifest:
    """Record crawl failures and filtered-empty repos on the manifest."""
    kept_repos = {record.repo.full_name for record in kept}
    empty = tuple(
        name for name in crawl.completed_repos if name not in kept_repos
    )
    return replace(manifest, failed_repos=crawl.failed_repos, empty_repos=empty)


def report_path_for(corpus_path: Path | str) -> Path:
    return Path(corpus_path).with_suffix(".report.json")


def save_build_report(
    path: Path | str,
    crawl: CrawlResult,
    kept: Sequence[PrRecord],
    dropped: Sequence[tuple[str, str]],
) -> None:
    """Persist crawl bookkeeping so a later split can fold it into the manifest."""
    kept_repos = {record.repo.full_name for record in kept}
    payload = {
        "failed_repos": list(crawl.failed_repos),
        "empty_repos": [
            name for name in crawl.completed_repos if name not in kept_repos
        ],
        "skipped_repos": list(crawl.skipped_repos),
        "dropped": [[record_id, reason] for record_id, reason in dropped],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def apply_build_report(manifest: CorpusManifest, path: Path | str) -> CorpusManifest:
    """Fold a build report's failed/empty repo lists into the manifest."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return replace(
        manifest,
        failed_repos=tuple(payload.get("failed_repos", ())),
        empty_repos=tuple(payload.get("empty_repos", ())),
    )
