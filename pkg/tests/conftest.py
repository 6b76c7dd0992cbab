"""Shared fixtures: an in-process GitHub API mock and a title-backend stub.

Both servers are real HTTP servers on loopback ports, so the client code under
test runs its actual network stack; tests stay hermetic because nothing ever
leaves 127.0.0.1.
"""

from __future__ import annotations

import itertools
import json
import socket
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from prtitle.github import GitHubClient


def _page(items: list, query: dict) -> list:
    per_page = int(query.get("per_page", ["30"])[0])
    page = int(query.get("page", ["1"])[0])
    start = (page - 1) * per_page
    return items[start : start + per_page]


class _QuietServer(ThreadingHTTPServer):
    """Clients under test may hang up early (timeouts); don't spam stderr."""

    def handle_error(self, request, client_address):
        pass


@dataclass
class _Rule:
    contains: str
    status: int
    body: object
    headers: dict
    times: int | None  # None means "until reset"


class MockGitHubAPI:
    """Programmable stand-in for api.github.com.

    Tests register repos, pulls, compares, and issues, then point a
    GitHubClient at ``base_url``.  Error injection matches on a path
    substring and can be limited to the next N requests.
    """

    def __init__(self) -> None:
        self.reset()
        handler = self._build_handler()
        self.httpd = _QuietServer(("127.0.0.1", 0), handler)
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def reset(self) -> None:
        self.repos: dict[str, dict] = {}
        self.search_results: dict[str, list[str]] = {}
        self.rules: list[_Rule] = []
        self.requests: list[dict] = []
        self._shas = itertools.count(1)

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.httpd.server_port}"

    def close(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()

    # -- fixture-building helpers ------------------------------------------

    def add_repo(self, full_name: str) -> None:
        self.repos.setdefault(
            full_name, {"pulls": {}, "pull_commits": {}, "compares": {}, "issues": {}}
        )

    def _commit(self, message: str) -> dict:
        return {"sha": f"{next(self._shas):040x}", "commit": {"message": message}}

    def add_compare(self, full_name: str, spec: str, messages: list[str]) -> None:
        self.add_repo(full_name)
        self.repos[full_name]["compares"][spec] = [self._commit(m) for m in messages]

    def add_pull(
        self,
        full_name: str,
        number: int,
        title: str,
        body: str | None = None,
        created_at: str = "2021-06-01T00:00:00Z",
        author: str = "alice",
        commit_messages: list[str] | None = None,
    ) -> None:
        self.add_repo(full_name)
        self.repos[full_name]["pulls"][number] = {
            "number": number,
            "title": title,
            "body": body,
            "created_at": created_at,
            "user": {"login": author},
        }
        self.repos[full_name]["pull_commits"][number] = [
            self._commit(m) for m in (commit_messages or [])
        ]

    def add_issue(self, full_name: str, number: int, title: str) -> None:
        self.add_repo(full_name)
        self.repos[full_name]["issues"][number] = {"number": number, "title": title}

    def fail(
        self,
        contains: str,
        status: int = 500,
        body: object = None,
        headers: dict | None = None,
        times: int | None = 1,
    ) -> None:
        self.rules.append(
            _Rule(
                contains=contains,
                status=status,
                body=body if body is not None else {"message": "injected failure"},
                headers=headers or {},
                times=times,
            )
        )

    def requests_for(self, contains: str) -> list[dict]:
        return [r for r in self.requests if contains in r["path"]]

    # -- routing -------------------------------------------------------------

    def _respond(self, path: str, query: dict) -> tuple[int, object, dict]:
        for rule in list(self.rules):
            if rule.contains in path:
                if rule.times is not None:
                    rule.times -= 1
                    if rule.times <= 0:
                        self.rules.remove(rule)
                return rule.status, rule.body, rule.headers
        parts = [p for p in path.strip("/").split("/") if p]
        try:
            if parts[:2] == ["search", "repositories"]:
                names = self.search_results.get(query.get("q", [""])[0], [])
                shown = names[: int(query.get("per_page", ["30"])[0])]
                return (
                    200,
                    {"total_count": len(names), "items": [{"full_name": n} for n in shown]},
                    {},
                )
            if parts[0] != "repos" or len(parts) < 4:
                return 404, {"message": "Not Found"}, {}
            repo = self.repos.get(f"{parts[1]}/{parts[2]}")
            if repo is None:
                return 404, {"message": "Not Found"}, {}
            kind = parts[3]
            if kind == "compare" and len(parts) >= 5:
                spec = "/".join(parts[4:])
                commits = repo["compares"].get(spec)
                if commits is None:
                    return 404, {"message": "Not Found"}, {}
                return (
                    200,
                    {"total_commits": len(commits), "commits": _page(commits, query)},
                    {},
                )
            if kind == "pulls":
                if len(parts) == 4:
                    listing = [repo["pulls"][n] for n in sorted(repo["pulls"], reverse=True)]
                    return 200, _page(listing, query), {}
                number = int(parts[4])
                if number not in repo["pulls"]:
                    return 404, {"message": "Not Found"}, {}
                if len(parts) == 6 and parts[5] == "commits":
                    return 200, _page(repo["pull_commits"][number], query), {}
                return 200, repo["pulls"][number], {}
            if kind == "issues" and len(parts) == 5:
                issue = repo["issues"].get(int(parts[4]))
                if issue is None:
                    return 404, {"message": "Not Found"}, {}
                return 200, issue, {}
        except (KeyError, ValueError, IndexError):
            pass
        return 404, {"message": "Not Found"}, {}

    def _build_handler(self) -> type:
        api = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args: object) -> None:
                pass

            def do_GET(self) -> None:
                parsed = urlparse(self.path)
                query = parse_qs(parsed.query)
                api.requests.append(
                    {"path": parsed.path, "query": query, "headers": dict(self.headers)}
                )
                status, body, headers = api._respond(parsed.path, query)
                payload = body if isinstance(body, bytes) else json.dumps(body).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                for name, value in headers.items():
                    self.send_header(name, value)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

        return Handler


class MockTitleBackend:
    """Stub model server speaking the fixed JSON wire format.

    ``behavior`` tuples select the response:
      ("echo", k)     title = first k whitespace tokens of the posted source
      ("fixed", t)    title = t
      ("json", obj)   arbitrary JSON body with status 200
      ("status", n)   status n with a JSON error body
      ("raw", bytes)  status 200 with a non-JSON body
      ("sleep", s)    sleep s seconds, then echo
    """

    def __init__(self) -> None:
        self.reset()
        handler = self._build_handler()
        self.httpd = _QuietServer(("127.0.0.1", 0), handler)
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def reset(self) -> None:
        self.behavior: tuple = ("echo", 3)
        self.requests: list[dict] = []

    @property
    def endpoint(self) -> str:
        return f"http://127.0.0.1:{self.httpd.server_port}/generate"

    def close(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()

    def _build_handler(self) -> type:
        backend = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args: object) -> None:
                pass

            def _send(self, status: int, payload: bytes) -> None:
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def do_GET(self) -> None:
                self._send(405, json.dumps({"message": "POST only"}).encode())

            def do_POST(self) -> None:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw)
                except ValueError:
                    body = None
                backend.requests.append(
                    {
                        "path": self.path,
                        "body": body,
                        "raw": raw,
                        "content_type": self.headers.get("Content-Type"),
                    }
                )
                mode, arg = backend.behavior
                if mode == "sleep":
                    time.sleep(arg)
                    mode, arg = "echo", 3
                if mode == "echo":
                    source = body["source"] if isinstance(body, dict) else ""
                    title = " ".join(str(source).split()[:arg])
                    self._send(200, json.dumps({"title": title}).encode())
                elif mode == "fixed":
                    self._send(200, json.dumps({"title": arg}).encode())
                elif mode == "json":
                    self._send(200, json.dumps(arg).encode())
                elif mode == "status":
                    self._send(arg, json.dumps({"message": "backend failure"}).encode())
                elif mode == "raw":
                    self._send(200, arg)
                else:  # pragma: no cover - fixture misuse
                    self._send(500, b"{}")

        return Handler


def free_port() -> int:
    """A port nothing is listening on (for connection-refused tests)."""
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def _github_server():
    server = MockGitHubAPI()
    yield server
    server.close()


@pytest.fixture
def mock_github(_github_server):
    _github_server.reset()
    return _github_server


@pytest.fixture
def github_client(mock_github):
    client = GitHubClient(base_endpoint=mock_github.base_url, retry_backoff=0.0)
    yield client
    client.close()


@pytest.fixture(scope="session")
def _backend_server():
    server = MockTitleBackend()
    yield server
    server.close()


@pytest.fixture
def title_backend(_backend_server):
    _backend_server.reset()
    return _backend_server


@pytest.fixture
def vscode_fixture(mock_github):
    """A compare view, PR, and linked issue modeled on a real vscode change."""
    repo = "microsoft/vscode"
    compare_spec = "main...TylerLeonhardt/copy-after-action"
    commit_messages = [
        "Fix inactive jupyter notebook view after running a cell",
        "Add regression test for the copy-after-run action",
    ]
    description = "Fixes #145340"
    issue_title = "Jupyter notebook view stays inactive after running a cell"
    mock_github.add_compare(repo, compare_spec, commit_messages)
    mock_github.add_pull(
        repo,
        146125,
        "Fixes #145340",
        body=description,
        created_at="2022-03-28T17:00:00Z",
        author="TylerLeonhardt",
        commit_messages=commit_messages,
    )
    mock_github.add_issue(repo, 145340, issue_title)
    return {
        "repo": repo,
        "compare_url": f"https://github.com/{repo}/compare/{compare_spec}",
        "pull_url": f"https://github.com/{repo}/pull/146125",
        "issue_url": f"https://github.com/{repo}/issues/145340",
        "description": description,
        "commit_messages": commit_messages,
        "issue_title": issue_title,
    }


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    rows = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", "call") != "call" and status != "error":
                continue
            nodeid = str(getattr(report, "nodeid", ""))
            if "test_acceptance.py" in nodeid:
                rows.append((nodeid.split("::")[-1], status))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(set(rows)):
        label = "PASS" if status == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}  {name}")
