// Event-stream reader built on fetch so the resume cursor can ride the
// ?after_seq query parameter. The server frames events as
// "id: <seq>\ndata: <json>\n\n" with ": keepalive" comment frames between.

import type { FetchLike } from "./api.js";
import type { EngineEvent } from "./types.js";

export type StreamStatus = "connecting" | "live" | "lost" | "closed";

/** Incremental frame parser; feed it raw chunks, get decoded events back. */
export function createFrameParser(): (chunk: string) => EngineEvent[] {
  let tail = "";
  return (chunk) => {
    tail += chunk;
    const events: EngineEvent[] = [];
    let cut = tail.indexOf("\n\n");
    while (cut >= 0) {
      const frame = tail.slice(0, cut);
      tail = tail.slice(cut + 2);
      cut = tail.indexOf("\n\n");
      const data = frame
        .split("\n")
        .filter((line) => line.startsWith("data:"))
        .map((line) => line.slice(5).trimStart())
        .join("\n");
      if (!data) continue; // comment-only keepalive frame
      events.push(JSON.parse(data) as EngineEvent);
    }
    return events;
  };
}

export type StreamOptions = {
  base: string;
  onEvent: (ev: EngineEvent) => void;
  onStatus: (status: StreamStatus) => void;
  afterSeq?: number;
  fetchFn?: FetchLike;
  retryDelayMs?: number;
};

export type StreamHandle = { close(): void };

/**
 * Hold a live stream open against the service, reconnecting after drops.
 * The cursor advances past every delivered event, so each reconnect resumes
 * with ?after_seq and the caller never sees a sequence number twice.
 */
export function openEventStream(opts: StreamOptions): StreamHandle {
  const fetchFn: FetchLike = opts.fetchFn ?? ((input, init) => fetch(input, init));
  const retryDelayMs = opts.retryDelayMs ?? 1000;
  let cursor = opts.afterSeq ?? -1;
  let closed = false;
  let controller: AbortController | null = null;

  const pump = async (): Promise<void> => {
    while (!closed) {
      controller = new AbortController();
      opts.onStatus("connecting");
      try {
        const res = await fetchFn(`${opts.base}/events?after_seq=${cursor}`, {
          signal: controller.signal,
          headers: { accept: "text/event-stream" },
        });
        if (!res.ok || !res.body) {
          throw new Error(`stream http ${res.status}`);
        }
        opts.onStatus("live");
        const reader = res.body.getReader();
        const decoder = new TextDecoder();
        const parse = createFrameParser();
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          for (const ev of parse(decoder.decode(value, { stream: true }))) {
            if (ev.seq <= cursor) continue;
            cursor = ev.seq;
            opts.onEvent(ev);
          }
        }
        throw new Error("stream ended");
      } catch {
        if (closed) break;
        opts.onStatus("lost");
        await delay(retryDelayMs);
      }
    }
    opts.onStatus("closed");
  };
  void pump();

  return {
    close() {
      closed = true;
      controller?.abort();
    },
  };
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
