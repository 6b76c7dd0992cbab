import { ApiError, GeneratePayload, GenerateResponse, generateTitle } from "./api.js";
import { copyText } from "./clipboard.js";

export type Phase = "idle" | "pending" | "done" | "error";

export interface FormState {
  phase: Phase;
  result?: GenerateResponse;
  errorDetail?: string;
}

const ERROR_MESSAGES: Record<string, string> = {
  invalid_request: "The request was rejected as malformed. Reload the page and try again.",
  malformed_url:
    "That does not look like a GitHub PR link. Expected " +
    "https://github.com/owner/repo/compare/base...head or https://github.com/owner/repo/pull/123.",
  not_found: "GitHub could not find that pull request or compare view.",
  rate_limited: "GitHub is rate-limiting requests right now. Wait a minute and retry.",
  empty_source: "Nothing to summarize: no description, commits, or issue titles were found.",
  backend_unavailable: "The title model server is not reachable.",
  backend_error: "The title model server returned an unusable answer.",
  upstream: "GitHub returned an unexpected error.",
  network: "Could not reach the server.",
  decode_error: "GitHub returned a response that could not be read.",
};

function messageFor(err: unknown): string {
  if (err instanceof ApiError) {
    const known = ERROR_MESSAGES[err.code];
    if (known) {
      return known;
    }
    return err.detail || "Something went wrong.";
  }
  return "Something went wrong.";
}

export function splitIssueUrls(raw: string): string[] {
  return raw.split(/\s+/).filter((url) => url.length > 0);
}

export function initApp(doc: Document): void {
  const form = doc.getElementById("generate-form") as HTMLFormElement;
  const prUrl = doc.getElementById("pr-url") as HTMLInputElement;
  const issueUrls = doc.getElementById("issue-urls") as HTMLTextAreaElement;
  const description = doc.getElementById("description") as HTMLTextAreaElement;
  const generate = doc.getElementById("generate") as HTMLButtonElement;
  const spinner = doc.getElementById("spinner") as HTMLElement;
  const result = doc.getElementById("result") as HTMLElement;
  const title = doc.getElementById("title") as HTMLElement;
  const warnings = doc.getElementById("warnings") as HTMLUListElement;
  const copy = doc.getElementById("copy") as HTMLButtonElement;
  const copyConfirm = doc.getElementById("copy-confirm") as HTMLElement;
  const copyFallback = doc.getElementById("copy-fallback") as HTMLElement;
  const copyFallbackText = doc.getElementById("copy-fallback-text") as HTMLTextAreaElement;
  const error = doc.getElementById("error") as HTMLElement;

  let state: FormState = { phase: "idle" };

  function setState(next: FormState): void {
    state = next;
    render();
  }

  function render(): void {
    generate.disabled = state.phase === "pending" || prUrl.value.trim() === "";
    spinner.classList.toggle("hidden", state.phase !== "pending");
    error.classList.toggle("hidden", state.phase !== "error");
    error.textContent = state.phase === "error" ? state.errorDetail ?? "" : "";
    result.classList.toggle("hidden", state.phase !== "done");
    if (state.phase === "done" && state.result) {
      // byte-for-byte: the title is never reformatted on the client
      title.textContent = state.result.title;
      warnings.replaceChildren(
        ...state.result.warnings.map((text) => {
          const item = doc.createElement("li");
          item.textContent = text;
          return item;
        }),
      );
    }
  }

  async function submit(): Promise<void> {
    if (state.phase === "pending" || prUrl.value.trim() === "") {
      return; // one request at a time; nothing to send without a URL
    }
    copyConfirm.classList.add("hidden");
    copyFallback.classList.add("hidden");
    setState({ phase: "pending" });
    const payload: GeneratePayload = {
      pr_url: prUrl.value.trim(),
      issue_urls: splitIssueUrls(issueUrls.value),
    };
    if (description.value.trim() !== "") {
      payload.description = description.value;
    }
    try {
      setState({ phase: "done", result: await generateTitle(payload) });
    } catch (err) {
      setState({ phase: "error", errorDetail: messageFor(err) });
    }
  }

  async function copyTitle(): Promise<void> {
    if (state.phase !== "done" || !state.result) {
      return;
    }
    if (await copyText(state.result.title)) {
      copyConfirm.classList.remove("hidden");
      setTimeout(() => copyConfirm.classList.add("hidden"), 1500);
    } else {
      copyFallbackText.value = state.result.title;
      copyFallback.classList.remove("hidden");
      copyFallbackText.select();
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });
  prUrl.addEventListener("input", render);
  copy.addEventListener("click", () => void copyTitle());

  render();
}
