"""Command-line interface: generate, evaluate, dataset build/split/repos, serve."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import dataset, evalharness
from .assembly import GenerationRequest
from .errors import PrTitleError
from .github import DEFAULT_API_BASE, ApiCredentials, GitHubClient
from .service import ServiceConfig, run_generation, serve
from .summarizer import (
    DEFAULT_MAX_TITLE_TOKENS,
    DEFAULT_TIMEOUT_MS,
    BackendKind,
    BackendSpec,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    """Argument combinations argparse alone cannot reject."""


def _add_backend_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend",
        choices=[kind.value for kind in BackendKind],
        default=BackendKind.EXTRACTIVE.value,
        help="title generation backend (default: extractive)",
    )
    parser.add_argument(
        "--endpoint", default=None, help="remote backend URL (required with --backend remote)"
    )
    parser.add_argument("--max-title-tokens", type=int, default=DEFAULT_MAX_TITLE_TOKENS)
    parser.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)


def _backend_spec(args: argparse.Namespace) -> BackendSpec:
    kind = BackendKind(args.backend)
    if kind == BackendKind.REMOTE and not args.endpoint:
        raise UsageError("--backend remote requires --endpoint")
    try:
        return BackendSpec(
            kind=kind,
            remote_endpoint=args.endpoint,
            max_title_tokens=args.max_title_tokens,
            timeout_ms=args.timeout_ms,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _client(github_base: str) -> GitHubClient:
    return GitHubClient(credentials=ApiCredentials.from_env(), base_endpoint=github_base)


def _parse_cutoff(text: str) -> datetime:
    cutoff = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if cutoff.tzinfo is None:
        cutoff = cutoff.replace(tzinfo=timezone.utc)
    return cutoff


def cmd_generate(args: argparse.Namespace) -> int:
    config = ServiceConfig(
        backend_spec=_backend_spec(args),
        github_base=args.github_base,
        max_issue_urls=args.max_issue_urls,
    )
    request = GenerationRequest(
        pr_url=args.pr_url,
        issue_urls=tuple(args.issue_urls),
        description=args.description,
    )
    with _client(args.github_base) as client:
        response = run_generation(request, client, config)
    for warning in response.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(response.title)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    run = evalharness.evaluate(args.corpus, args.manifest, _backend_spec(args))
    csv_path, json_path = evalharness.run_artifact_paths(args.corpus, run.backend_id)
    evalharness.write_per_example_csv(run, csv_path)
    evalharness.write_run_json(run, json_path)
    print(evalharness.render_table([run]))
    if run.excluded:
        print(f"warning: {run.excluded} example(s) excluded", file=sys.stderr)
    print(f"per-example scores: {csv_path}", file=sys.stderr)
    print(f"run details: {json_path}", file=sys.stderr)
    return EXIT_OK


def cmd_dataset_repos(args: argparse.Namespace) -> int:
    with _client(args.github_base) as client:
        repos = dataset.build_repo_list(client, per_list=args.per_list)
    dataset.save_repo_list(repos, args.out)
    print(f"wrote {len(repos)} repos to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_dataset_build(args: argparse.Namespace) -> int:
    repos = dataset.load_repo_list(args.repos)
    with _client(args.github_base) as client:
        crawl = dataset.crawl_prs(
            client,
            repos,
            cutoff=args.cutoff,
            checkpoint_path=args.checkpoint,
            max_prs_per_repo=args.max_prs_per_repo,
        )
    kept, dropped = dataset.clean(crawl.records)
    dataset.save_corpus(kept, args.out)
    dataset.save_build_report(dataset.report_path_for(args.out), crawl, kept, dropped)
    print(
        f"crawled {len(crawl.records)} PRs from {len(crawl.completed_repos)} repos "
        f"({len(crawl.failed_repos)} failed), kept {len(kept)}, dropped {len(dropped)}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_dataset_split(args: argparse.Namespace) -> int:
    records = dataset.load_corpus(args.corpus_in)
    manifest = dataset.split(records, seed=args.seed)
    report_path = dataset.report_path_for(args.corpus_in)
    if report_path.exists():
        manifest = dataset.apply_build_report(manifest, report_path)
    out = args.out if args.out else dataset.manifest_path_for(args.corpus_in)
    dataset.save_manifest(manifest, out)
    counts = manifest.counts
    print(
        f"split {manifest.total} records into {counts[0]}/{counts[1]}/{counts[2]} "
        f"(seed {manifest.seed}); manifest: {out}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    config = ServiceConfig(
        port=args.port,
        backend_spec=_backend_spec(args),
        github_base=args.github_base,
        token=os.environ.get("GITHUB_TOKEN") or None,
        max_issue_urls=args.max_issue_urls,
        static_dir=args.static,
    )
    serve(config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prtitle",
        description="Suggest pull-request titles from commits, issues, and descriptions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="print a suggested title for one PR")
    gen.add_argument("--pr-url", required=True, help="GitHub compare or pull-request URL")
    gen.add_argument(
        "--issue-url",
        action="append",
        default=[],
        dest="issue_urls",
        help="linked issue URL (repeatable)",
    )
    gen.add_argument("--description", default=None)
    gen.add_argument("--github-base", default=DEFAULT_API_BASE)
    gen.add_argument("--max-issue-urls", type=int, default=10)
    _add_backend_arguments(gen)
    gen.set_defaults(handler=cmd_generate)

    ev = sub.add_parser("evaluate", help="score a backend on a corpus test split")
    ev.add_argument("--corpus", required=True, type=Path)
    ev.add_argument("--manifest", required=True, type=Path)
    _add_backend_arguments(ev)
    ev.set_defaults(handler=cmd_evaluate)

    ds = sub.add_parser("dataset", help="corpus construction commands")
    ds_sub = ds.add_subparsers(dest="dataset_command", required=True)

    repos = ds_sub.add_parser("repos", help="regenerate the candidate repo list")
    repos.add_argument("--out", required=True, type=Path)
    repos.add_argument("--per-list", type=int, default=100)
    repos.add_argument("--github-base", default=DEFAULT_API_BASE)
    repos.set_defaults(handler=cmd_dataset_repos)

    build = ds_sub.add_parser("build", help="crawl and clean a PR corpus")
    build.add_argument("--repos", required=True, type=Path)
    build.add_argument("--out", required=True, type=Path)
    build.add_argument(
        "--cutoff",
        type=_parse_cutoff,
        default=dataset.DEFAULT_CUTOFF,
        help="keep PRs created strictly before this UTC instant (default 2022-01-01T00:00:00Z)",
    )
    build.add_argument("--checkpoint", type=Path, default=None)
    build.add_argument("--max-prs-per-repo", type=int, default=None)
    build.add_argument("--github-base", default=DEFAULT_API_BASE)
    build.set_defaults(handler=cmd_dataset_build)

    split = ds_sub.add_parser("split", help="write a train/val/test manifest")
    split.add_argument("--in", dest="corpus_in", required=True, type=Path, help="corpus JSONL path")
    split.add_argument("--seed", required=True, type=int)
    split.add_argument("--out", type=Path, default=None, help="manifest path (default: beside the corpus)")
    split.set_defaults(handler=cmd_dataset_split)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument(
        "--port", type=int, default=int(os.environ.get("PRTITLE_PORT", "8000"))
    )
    srv.add_argument("--github-base", default=DEFAULT_API_BASE)
    srv.add_argument("--max-issue-urls", type=int, default=10)
    srv.add_argument("--static", default=None, help="directory with the built web UI")
    _add_backend_arguments(srv)
    srv.set_defaults(handler=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    arguments = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(arguments)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrTitleError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
