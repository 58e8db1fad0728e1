/** Thin typed client for the /v1 HTTP API. `fetch` is injectable so tests can
 * substitute a fake transport. */

import type {
  ApiError,
  ModelStatus,
  QueuePage,
  TrainResult,
  VerdictResult,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

async function parseError(res: Response): Promise<ApiRequestError> {
  let code = "internal";
  let message = `HTTP ${res.status}`;
  try {
    const body = (await res.json()) as { error?: ApiError };
    if (body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body: keep the defaults
  }
  return new ApiRequestError(res.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      throw await parseError(res);
    }
    return (await res.json()) as T;
  }

  postText(text: string, options: { authorId?: number; split?: string } = {}) {
    return this.request<{ sample_id: string }>("POST", "/v1/texts", {
      text,
      author_id: options.authorId ?? null,
      split: options.split ?? "unlabeled",
    });
  }

  classify(text: string, sampleId?: string) {
    return this.request<{ attribution: unknown; item_id: string }>("POST", "/v1/classify", {
      text,
      sample_id: sampleId ?? null,
    });
  }

  async fetchQueue(state = "pending"): Promise<QueuePage["items"]> {
    const items: QueuePage["items"] = [];
    let cursor: string | null = null;
    do {
      const params = new URLSearchParams({ state, limit: "100" });
      if (cursor) params.set("cursor", cursor);
      const page: QueuePage = await this.request<QueuePage>(
        "GET",
        `/v1/review/queue?${params}`,
      );
      items.push(...page.items);
      cursor = page.next_cursor;
    } while (cursor);
    return items;
  }

  submitVerdict(itemId: string, accepted: boolean, trueAuthor?: number) {
    return this.request<VerdictResult>("POST", `/v1/review/${itemId}/verdict`, {
      accepted,
      true_author: trueAuthor ?? null,
    });
  }

  train(epochs = 5, step = 0.01) {
    return this.request<TrainResult>("POST", "/v1/train", { epochs, step });
  }

  status() {
    return this.request<ModelStatus>("GET", "/v1/model/status");
  }
}
