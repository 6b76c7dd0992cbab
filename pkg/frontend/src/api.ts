// Typed client for the generation service. Same-origin relative paths so the
// bundle works wherever the service mounts it.

export interface GeneratePayload {
  pr_url: string;
  issue_urls: string[];
  description?: string;
}

export interface SourcePart {
  kind: "description" | "commit" | "issue_title";
  content: string;
}

export interface GenerateResponse {
  title: string;
  source_sequence: string;
  parts: SourcePart[];
  warnings: string[];
  backend_id: string;
}

export interface HealthResponse {
  status: string;
  backend: string;
  backend_reachable: boolean;
}

export class ApiError extends Error {
  constructor(readonly code: string, readonly detail: string, readonly status: number) {
    super(detail);
  }
}

export async function generateTitle(payload: GeneratePayload): Promise<GenerateResponse> {
  let res: Response;
  try {
    res = await fetch("/api/generate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  } catch (err) {
    throw new ApiError("network", "Could not reach the server.", 0);
  }
  if (!res.ok) {
    throw new ApiError(...(await errorParts(res)), res.status);
  }
  return (await res.json()) as GenerateResponse;
}

export async function checkHealth(): Promise<HealthResponse> {
  const res = await fetch("/healthz");
  if (!res.ok) {
    throw new ApiError("internal", `health check failed (${res.status})`, res.status);
  }
  return (await res.json()) as HealthResponse;
}

async function errorParts(res: Response): Promise<[string, string]> {
  try {
    const body = (await res.json()) as { error?: string; detail?: string };
    if (typeof body.error === "string") {
      return [body.error, body.detail ?? ""];
    }
  } catch {
    // not the service's JSON error shape; fall through
  }
  return ["internal", `unexpected response (${res.status})`];
}
