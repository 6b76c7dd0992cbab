"""Run a title-generation backend over a test split and report ROUGE scores."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .assembly import (
    DEFAULT_MAX_SOURCE_TOKENS,
    build_source_sequence,
    truncate_to_budget,
)
from .dataset import PrRecord, load_corpus, load_manifest
from .errors import EmptySplitError, PrTitleError
from .rouge import RougeReport, corpus_rouge, score_pair
from .summarizer import BackendSpec, generate_title

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExampleScore:
    """Per-example audit row: what was generated and its three F1 scores."""

    record_id: str
    generated_title: str
    r1_f1: float
    r2_f1: float
    rl_f1: float


@dataclass(frozen=True)
class EvalRun:
    """One backend's pass over a test split.

    ``excluded`` counts examples the backend failed on; they are reported but
    never averaged into the scores.
    """

    backend_id: str
    report: RougeReport
    per_example: tuple[ExampleScore, ...]
    excluded: int
    wall_time_ms: int


def evaluate_records(
    records: Sequence[PrRecord],
    backend_spec: BackendSpec,
    max_source_tokens: int = DEFAULT_MAX_SOURCE_TOKENS,
) -> EvalRun:
    """Score ``backend_spec`` against the original titles of ``records``.

    Each record's source sequence is assembled and truncated exactly as in the
    generation service, the backend produces a title, and the title is scored
    against the record's own title.  Backend failures exclude that example
    with a warning; if every example fails, EmptySplitError is raised.
    """
    if not records:
        raise EmptySplitError("test split is empty")
    start = time.perf_counter()
    pairs: list[tuple[str, str]] = []
    rows: list[ExampleScore] = []
    excluded = 0
    for record in records:
        try:
            sequence = build_source_sequence(
                description=record.description,
                commit_subjects=record.commit_subjects,
                issue_titles=record.linked_issue_titles,
            )
            sequence = truncate_to_budget(sequence, max_source_tokens)
            suggestion = generate_title(sequence, backend_spec)
        except PrTitleError as exc:
            logger.warning("excluding %s from scoring: %s", record.record_id, exc)
            excluded += 1
            continue
        r1, r2, rl = score_pair(record.title, suggestion.title)
        rows.append(
            ExampleScore(
                record_id=record.record_id,
                generated_title=suggestion.title,
                r1_f1=r1.f1,
                r2_f1=r2.f1,
                rl_f1=rl.f1,
            )
        )
        pairs.append((record.title, suggestion.title))
    if not rows:
        raise EmptySplitError(f"every test example failed ({excluded} excluded)")
    report = corpus_rouge(pairs)
    wall_time_ms = int((time.perf_counter() - start) * 1000)
    return EvalRun(
        backend_id=backend_spec.kind.value,
        report=report,
        per_example=tuple(rows),
        excluded=excluded,
        wall_time_ms=wall_time_ms,
    )


def evaluate(
    corpus_path: Path | str,
    manifest_path: Path | str,
    backend_spec: BackendSpec,
    max_source_tokens: int = DEFAULT_MAX_SOURCE_TOKENS,
) -> EvalRun:
    """Load a corpus and manifest and evaluate the backend on the test split."""
    records = load_corpus(corpus_path)
    manifest = load_manifest(manifest_path)
    if not manifest.test:
        raise EmptySplitError(f"manifest has an empty test split: {manifest_path}")
    by_id = {record.record_id: record for record in records}
    try:
        test_records = [by_id[record_id] for record_id in manifest.test]
    except KeyError as exc:
        raise ValueError(f"manifest references a record missing from the corpus: {exc}")
    return evaluate_records(test_records, backend_spec, max_source_tokens)


def render_table(runs: Sequence[EvalRun]) -> str:
    """Fixed-width score table: one row per backend, best value per column starred.

    Scores are F1 means scaled by 100 and rounded to two decimals, in the
    column order ROUGE-1, ROUGE-2, ROUGE-L.
    """
    if not runs:
        raise ValueError("no runs to render")
    headers = ("Approach", "ROUGE-1", "ROUGE-2", "ROUGE-L")
    triples = [
        (run.report.rouge1.f1, run.report.rouge2.f1, run.report.rougeL.f1)
        for run in runs
    ]
    best = tuple(max(column) for column in zip(*triples))
    body: list[tuple[str, ...]] = []
    for run, triple in zip(runs, triples):
        cells = [run.backend_id]
        for value, top in zip(triple, best):
            marker = "*" if value == top else ""
            cells.append(f"{value * 100:.2f}{marker}")
        body.append(tuple(cells))
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in body)) for i in range(len(headers))
    ]
    lines = [
        "  ".join(headers[i].ljust(widths[i]) for i in range(len(headers))).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in body:
        cells = [row[0].ljust(widths[0])]
        cells += [row[i].rjust(widths[i]) for i in range(1, len(headers))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def write_per_example_csv(run: EvalRun, path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["record_id", "generated_title", "rouge1_f1", "rouge2_f1", "rougeL_f1"])
        for row in run.per_example:
            writer.writerow(
                [row.record_id, row.generated_title, row.r1_f1, row.r2_f1, row.rl_f1]
            )


def write_run_json(run: EvalRun, path: Path | str) -> None:
    payload = {
        "backend_id": run.backend_id,
        "excluded": run.excluded,
        "wall_time_ms": run.wall_time_ms,
        "n_examples": run.report.n_examples,
        "report": {
            name: {"recall": score.recall, "precision": score.precision, "f1": score.f1}
            for name, score in (
                ("rouge1", run.report.rouge1),
                ("rouge2", run.report.rouge2),
                ("rougeL", run.report.rougeL),
            )
        },
        "per_example": [
            {
                "record_id": row.record_id,
                "generated_title": row.generated_title,
                "rouge1_f1": row.r1_f1,
                "rouge2_f1": row.r2_f1,
                "rougeL_f1": row.rl_f1,
            }
            for row in run.per_example
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def run_artifact_paths(corpus_path: Path | str, backend_id: str) -> tuple[Path, Path]:
    """CSV and JSON output paths for a run, placed beside the corpus file."""
    corpus = Path(corpus_path)
    stem = corpus.stem
    return (
        corpus.with_name(f"{stem}.{backend_id}.scores.csv"),
        corpus.with_name(f"{stem}.{backend_id}.run.json"),
    )
