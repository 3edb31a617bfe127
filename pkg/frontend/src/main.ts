// Console wiring: one reducer, one render target, one click listener.
// Stream events and command results all funnel through dispatch(), so the
// page is always a projection of a single state value. Commands fire only
// from operator clicks; confirmations come back on the event stream.

import { ApiError, ServiceClient, type FetchLike } from "./api.js";
import { renderApp } from "./render.js";
import {
  initialState,
  reduce,
  type ConsoleState,
  type Msg,
} from "./state.js";
import { openEventStream, type StreamHandle } from "./stream.js";
import type { ControlVerb, Verdict } from "./types.js";

export type ConsoleOptions = {
  base: string;
  fetchFn?: FetchLike;
  retryDelayMs?: number;
  now?: () => number;
};

export type ConsoleHandle = {
  getState(): ConsoleState;
  dispatch(msg: Msg): void;
  refresh(): Promise<void>;
  close(): void;
};

export function mountConsole(root: HTMLElement, opts: ConsoleOptions): ConsoleHandle {
  const client = new ServiceClient(opts.base, opts.fetchFn);
  const now = opts.now ?? (() => Date.now());
  let state = initialState();
  let stream: StreamHandle | null = null;
  let closed = false;

  const render = (): void => {
    root.innerHTML = renderApp(state, now());
  };
  const dispatch = (msg: Msg): void => {
    state = reduce(state, msg);
    render();
  };
  const report = (requestId: string, err: unknown): void => {
    const code = err instanceof ApiError ? err.code : "network";
    const message = err instanceof Error ? err.message : String(err);
    if (requestId) {
      dispatch({ type: "command_failed", requestId, code, message });
    } else {
      dispatch({ type: "notice", requestId, code, message });
    }
  };
  const refresh = async (): Promise<void> => {
    const summary = await client.state();
    if (!closed) dispatch({ type: "snapshot", summary });
  };

  root.addEventListener("click", (raw: Event) => {
    const origin = raw.target as HTMLElement | null;
    const el = origin?.closest?.("[data-action]") as HTMLElement | null;
    if (!el || el.hasAttribute("disabled")) return;
    const action = el.dataset["action"];
    if (action === "answer") {
      const requestId = el.dataset["request"] ?? "";
      const verdict = (el.dataset["verdict"] ?? "deny") as Verdict;
      dispatch({ type: "command_sent", requestId, verdict });
      client.answer(requestId, verdict).catch((err) => report(requestId, err));
    } else if (action === "control") {
      const verb = (el.dataset["verb"] ?? "start") as ControlVerb;
      client
        .control(verb)
        .then(refresh)
        .catch((err) => report("", err));
    } else if (action === "withdraw") {
      client.withdraw(el.dataset["human"] ?? "").catch((err) => report("", err));
    } else if (action === "dismiss") {
      dispatch({ type: "dismiss_notice", id: Number(el.dataset["noticeId"]) });
    }
  });

  render();
  void refresh().catch(() => {
    // unreachable service; the stream status banner covers it
  });
  stream = openEventStream({
    base: opts.base,
    fetchFn: opts.fetchFn,
    retryDelayMs: opts.retryDelayMs,
    afterSeq: -1,
    onEvent: (event) => dispatch({ type: "engine_event", event, atMs: now() }),
    onStatus: (status) => {
      if (!closed) dispatch({ type: "connection", status });
    },
  });
  // deadline countdowns tick even when no events arrive
  const ticker = setInterval(() => {
    if (state.pending.length > 0) render();
  }, 1000);

  return {
    getState: () => state,
    dispatch,
    refresh,
    close() {
      closed = true;
      clearInterval(ticker);
      stream?.close();
    },
  };
}
