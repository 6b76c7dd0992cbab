"""Acceptance suite: one test per externally promised behavior, with runtime caps.

Each test here pins a contract the package advertises (metric values, URL
rewriting, pipeline shape, split arithmetic, table format, service errors) and
asserts the documented runtime budget where one exists.  Everything runs
against in-process mocks; no test touches the network.
"""

from __future__ import annotations

import random
import sys
import time
from datetime import datetime, timezone
from functools import lru_cache

import pytest
from fastapi.testclient import TestClient

from conftest import free_port
from prtitle.dataset import PrRecord, split
from prtitle.errors import MalformedUrlError
from prtitle.github import RepoRef, ResourceKind, parse_url, to_api_url, to_web_url
from prtitle.rouge import rouge_l, rouge_n, score_pair, tokenize
from prtitle.service import ServiceConfig, create_app
from prtitle.summarizer import BackendKind, BackendSpec

APPROX = pytest.approx


def exact(value: float) -> object:
    return pytest.approx(value, abs=1e-9)


# --- 1. hand-checked metric values ------------------------------------------

def test_rouge_hand_checked_scores():
    started = time.perf_counter()
    r1, r2, rl = score_pair("fix memory leak in parser", "fix leak in parser")
    assert (r1.recall, r1.precision, r1.f1) == (exact(0.8), exact(1.0), exact(8 / 9))
    assert (r2.recall, r2.precision, r2.f1) == (exact(0.5), exact(2 / 3), exact(4 / 7))
    assert (rl.recall, rl.precision, rl.f1) == (exact(0.8), exact(1.0), exact(8 / 9))
    swapped = rouge_l(["a", "b", "c", "d"], ["a", "c", "b", "d"])
    assert (swapped.recall, swapped.precision, swapped.f1) == (
        exact(0.75), exact(0.75), exact(0.75),
    )
    assert time.perf_counter() - started < 1.0


# --- 2. fuzzed equivalence with brute-force oracles --------------------------

def _overlap_oracle(ref: list[str], gen: list[str], n: int) -> int:
    """Clipped overlap by physically removing matched n-grams from a pool."""
    pool = [tuple(gen[i : i + n]) for i in range(len(gen) - n + 1)]
    matched = 0
    for gram in (tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)):
        if gram in pool:
            pool.remove(gram)
            matched += 1
    return matched


def _lcs_oracle(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    @lru_cache(maxsize=None)
    def longest(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + longest(i + 1, j + 1)
        return max(longest(i + 1, j), longest(i, j + 1))

    return longest(0, 0)


def _oracle_score(overlap: int, ref_count: int, gen_count: int):
    recall = overlap / ref_count if ref_count else 0.0
    precision = overlap / gen_count if gen_count else 0.0
    f1 = 2 * recall * precision / (recall + precision) if recall + precision > 0 else 0.0
    return recall, precision, f1


def test_rouge_matches_oracles_on_random_pairs():
    started = time.perf_counter()
    rng = random.Random(20220814)
    alphabet = "abcdefgh"
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(10_000)
    try:
        for _ in range(1_000):
            ref = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
            gen = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]

            for n in (1, 2):
                score = rouge_n(ref, gen, n)
                counts = (
                    _overlap_oracle(ref, gen, n),
                    max(len(ref) - n + 1, 0),
                    max(len(gen) - n + 1, 0),
                )
                assert (score.recall, score.precision, score.f1) == _oracle_score(*counts)
                # bounds and swap symmetry on every sample
                assert 0.0 <= score.recall <= 1.0
                assert 0.0 <= score.precision <= 1.0 and 0.0 <= score.f1 <= 1.0
                flipped = rouge_n(gen, ref, n)
                assert flipped.recall == score.precision
                assert flipped.precision == score.recall

            score = rouge_l(ref, gen)
            oracle = _oracle_score(_lcs_oracle(tuple(ref), tuple(gen)), len(ref), len(gen))
            assert (score.recall, score.precision, score.f1) == oracle
            flipped = rouge_l(gen, ref)
            assert (flipped.recall, flipped.precision) == (score.precision, score.recall)

            # identity: a sequence scored against itself is perfect wherever defined
            if ref:
                same = rouge_l(ref, ref)
                assert (same.recall, same.precision, same.f1) == (1.0, 1.0, 1.0)
                unigram = rouge_n(ref, ref, 1)
                assert (unigram.recall, unigram.precision, unigram.f1) == (1.0, 1.0, 1.0)
    finally:
        sys.setrecursionlimit(old_limit)
    assert time.perf_counter() - started < 30.0


# --- 3. URL rewriting ---------------------------------------------------------

COMPARE_URL = "https://github.com/microsoft/vscode/compare/main...TylerLeonhardt/copy-after-action"
COMPARE_API_URL = (
    "https://api.github.com/repos/microsoft/vscode/compare/main...TylerLeonhardt/copy-after-action"
)


def test_url_rewrite_and_fuzzed_classification():
    assert to_api_url(parse_url(COMPARE_URL)) == COMPARE_API_URL

    rng = random.Random(811)

    def name() -> str:
        return "".join(rng.choice("abcdefgh0123456789") for _ in range(rng.randint(1, 8)))

    checked = 0
    for _ in range(50):  # valid URLs classify and survive the web round trip
        owner, repo = name(), name()
        form = rng.randrange(3)
        if form == 0:
            head = name() if rng.random() < 0.5 else f"{name()}/{name()}"
            url = f"https://github.com/{owner}/{repo}/compare/{name()}...{head}"
            expected = ResourceKind.COMPARE
        elif form == 1:
            url = f"https://github.com/{owner}/{repo}/pull/{rng.randint(1, 99999)}"
            expected = ResourceKind.PULL_REQUEST
        else:
            url = f"https://github.com/{owner}/{repo}/issues/{rng.randint(1, 99999)}"
            expected = ResourceKind.ISSUE
        locator = parse_url(url)
        assert locator.kind == expected
        assert to_web_url(locator) == url
        assert to_api_url(locator).startswith("https://api.github.com/repos/")
        checked += 1

    breakers = [
        lambda: f"http://github.com/{name()}/{name()}/pull/7",
        lambda: f"https://gitlab.com/{name()}/{name()}/pull/7",
        lambda: f"https://github.com/{name()}/{name()}/pulls/7",
        lambda: f"https://github.com/{name()}/{name()}/pull/0",
        lambda: f"https://github.com/{name()}/{name()}/pull/abc",
        lambda: f"https://github.com/{name()}/{name()}/pull/7/files",
        lambda: f"https://github.com/{name()}/{name()}/issues/",
        lambda: f"https://github.com/{name()}/{name()}/compare/main..dev",
        lambda: f"https://github.com/{name()}/{name()}/compare/",
        lambda: f"https://github.com/{name()}/{name()}",
        lambda: f"https://github.com//{name()}/pull/7",
        lambda: "not a url at all",
    ]
    for index in range(50):  # invalid URLs are rejected, never misclassified
        with pytest.raises(MalformedUrlError):
            parse_url(breakers[index % len(breakers)]())
        checked += 1
    assert checked == 100


# --- 4. end-to-end generation over a mocked GitHub ---------------------------

def test_end_to_end_pull_request_fixture(mock_github, github_client, vscode_fixture):
    started = time.perf_counter()
    config = ServiceConfig(github_base=mock_github.base_url)
    client = TestClient(create_app(config, client=github_client))
    payload = {
        "pr_url": vscode_fixture["pull_url"],
        "issue_urls": [vscode_fixture["issue_url"]],
        "description": vscode_fixture["description"],
    }
    response = client.post("/api/generate", json=payload)
    assert response.status_code == 200
    body = response.json()

    kinds = [part["kind"] for part in body["parts"]]
    assert kinds[0] == "description"
    assert kinds[-1] == "issue_title"
    assert set(kinds[1:-1]) == {"commit"}
    assert len(kinds) == 2 + len(vscode_fixture["commit_messages"])

    for subject in vscode_fixture["commit_messages"]:
        assert subject in body["source_sequence"]
    assert vscode_fixture["issue_title"] in body["source_sequence"]

    title = body["title"]
    assert title.strip()
    assert len(tokenize(title)) <= 12

    titles = {client.post("/api/generate", json=payload).json()["title"] for _ in range(9)}
    titles.add(title)
    assert titles == {title}
    assert time.perf_counter() - started < 5.0


# --- 5. split arithmetic ------------------------------------------------------

_SPLIT_EPOCH = datetime(2021, 6, 1, tzinfo=timezone.utc)
_SPLIT_REPO = RepoRef("accept", "corpus")


def _records(n: int) -> list[PrRecord]:
    return [
        PrRecord(
            repo=_SPLIT_REPO,
            number=i,
            title="fix the parser crash",
            description="fix the parser crash",
            commit_subjects=(),
            linked_issue_titles=(),
            created_at=_SPLIT_EPOCH,
        )
        for i in range(1, n + 1)
    ]


def test_split_floor_rule_and_partition():
    started = time.perf_counter()
    assert split(_records(100), seed=0).counts == (80, 10, 10)
    assert split(_records(43_816), seed=0).counts == (35_054, 4_381, 4_381)

    assert split(_records(500), seed=99) == split(_records(500), seed=99)

    rng = random.Random(43_816)
    sizes = sorted({rng.randint(1, 10_000) for _ in range(25)} | {1, 2, 9, 10, 11, 19, 20, 100})
    for n in sizes:
        manifest = split(_records(n), seed=rng.randint(0, 10**6))
        sections = (set(manifest.train), set(manifest.val), set(manifest.test))
        assert manifest.counts[1] == manifest.counts[2] == n // 10
        assert sum(manifest.counts) == n
        assert sum(len(s) for s in sections) == len(set().union(*sections)) == n
    assert time.perf_counter() - started < 10.0


# --- 6. score table formatting ------------------------------------------------

def test_table_renders_reference_means():
    from prtitle.evalharness import EvalRun, render_table
    from prtitle.rouge import RougeReport, RougeScore

    run = EvalRun(
        backend_id="bart",
        report=RougeReport(
            rouge1=RougeScore(0.4722, 0.4722, 0.4722),
            rouge2=RougeScore(0.2527, 0.2527, 0.2527),
            rougeL=RougeScore(0.4312, 0.4312, 0.4312),
            n_examples=1,
        ),
        per_example=(),
        excluded=0,
        wall_time_ms=0,
    )
    table = render_table([run])
    rows = [" ".join(line.replace("*", " ").split()) for line in table.splitlines()]
    assert any(row.endswith("47.22 25.27 43.12") for row in rows)


# --- 7. service error contract -------------------------------------------------

def test_service_error_contract(mock_github, github_client):
    config = ServiceConfig(github_base=mock_github.base_url)
    client = TestClient(create_app(config, client=github_client))

    # missing pr_url: 400 plus a machine-readable code
    response = client.post("/api/generate", json={})
    assert response.status_code == 400
    assert response.json()["error"] == "malformed_url"

    # a 404 on one linked issue degrades to a warning, not a failure
    mock_github.add_compare("o/r", "main...fix", ["Fix parser crash", "Add a test"])
    response = client.post(
        "/api/generate",
        json={
            "pr_url": "https://github.com/o/r/compare/main...fix",
            "issue_urls": ["https://github.com/o/r/issues/404"],
        },
    )
    assert response.status_code == 200
    assert len(response.json()["warnings"]) == 1

    # unreachable remote backend: 502
    remote = ServiceConfig(
        github_base=mock_github.base_url,
        backend_spec=BackendSpec(
            kind=BackendKind.REMOTE,
            remote_endpoint=f"http://127.0.0.1:{free_port()}/generate",
            timeout_ms=300,
        ),
    )
    remote_client = TestClient(create_app(remote, client=github_client))
    response = remote_client.post(
        "/api/generate", json={"pr_url": "https://github.com/o/r/compare/main...fix"}
    )
    assert response.status_code == 502
    assert response.json()["error"] == "backend_unavailable"
