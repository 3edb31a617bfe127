// Thin command client for the consent service. Commands either land
// (confirmation arrives on the event stream) or raise an ApiError carrying
// the service's error code so the console can surface it inline.

import type {
  ControlVerb,
  PendingRequestWire,
  StateSummary,
  Verdict,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response decoded from {"error": ..., "message": ...}. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

const defaultFetch: FetchLike = (input, init) => fetch(input, init);

export class ServiceClient {
  constructor(
    readonly base: string,
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {}

  async state(): Promise<StateSummary> {
    return this.get<StateSummary>("/state");
  }

  async pending(): Promise<PendingRequestWire[]> {
    const body = await this.get<{ pending: PendingRequestWire[] }>("/requests");
    return body.pending;
  }

  /** Grant or deny a pending request; the stream confirms the outcome. */
  async answer(requestId: string, verdict: Verdict, note?: string): Promise<void> {
    const path = `/requests/${encodeURIComponent(requestId)}/${verdict}`;
    await this.post(path, note === undefined ? undefined : { note });
  }

  async withdraw(humanId: string): Promise<void> {
    await this.post("/withdraw", { human_id: humanId });
  }

  async control(verb: ControlVerb): Promise<void> {
    await this.post(`/control/${verb}`, undefined);
  }

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.base + path);
    return this.decode<T>(res);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const init: RequestInit = { method: "POST" };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    return this.decode<T>(res);
  }

  private async decode<T>(res: Response): Promise<T> {
    if (res.ok) {
      return (await res.json()) as T;
    }
    let code = `http_${res.status}`;
    let message = res.statusText || code;
    try {
      const body = (await res.json()) as {
        error?: string;
        message?: string;
        detail?: unknown;
      };
      if (typeof body.error === "string") code = body.error;
      if (typeof body.message === "string") message = body.message;
      else if (typeof body.detail === "string") message = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, code, message);
  }
}
