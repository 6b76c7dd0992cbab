import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, checkHealth, generateTitle } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("generateTitle", () => {
  it("posts the payload and returns the parsed response", async () => {
    const reply = {
      title: "fix inactive view for jupyter notebook",
      source_sequence: "a\nb",
      parts: [{ kind: "commit", content: "a" }],
      warnings: [],
      backend_id: "extractive",
    };
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(reply));
    vi.stubGlobal("fetch", fetchMock);

    const result = await generateTitle({ pr_url: "https://github.com/o/r/pull/1", issue_urls: [] });

    expect(result).toEqual(reply);
    expect(fetchMock).toHaveBeenCalledWith("/api/generate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pr_url: "https://github.com/o/r/pull/1", issue_urls: [] }),
    });
  });

  it("surfaces the service's error code and detail", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse({ error: "not_found", detail: "no such PR" }, 404)),
    );

    const failure = await generateTitle({ pr_url: "x", issue_urls: [] }).catch((err) => err);

    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("not_found");
    expect(failure.detail).toBe("no such PR");
    expect(failure.status).toBe(404);
  });

  it("maps a non-JSON error body to an internal error", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(new Response("<html>gateway</html>", { status: 500 })),
    );

    const failure = await generateTitle({ pr_url: "x", issue_urls: [] }).catch((err) => err);

    expect(failure.code).toBe("internal");
    expect(failure.status).toBe(500);
  });

  it("maps a refused connection to a network error", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("fetch failed")));

    const failure = await generateTitle({ pr_url: "x", issue_urls: [] }).catch((err) => err);

    expect(failure.code).toBe("network");
    expect(failure.status).toBe(0);
  });
});

describe("checkHealth", () => {
  it("returns the health document", async () => {
    const body = { status: "ok", backend: "extractive", backend_reachable: true };
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(body)));

    expect(await checkHealth()).toEqual(body);
  });

  it("throws on a failing probe", async () => {
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(new Response("", { status: 503 })));

    await expect(checkHealth()).rejects.toBeInstanceOf(ApiError);
  });
});
