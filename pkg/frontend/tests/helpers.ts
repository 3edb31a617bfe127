// Shared test plumbing: fixture loading, reducer replay, a DOM sandbox.
// Fixtures under tests/fixtures are wire captures from the bundled
// scenarios, so reducer tests exercise the exact JSON the service emits.

import { readFileSync } from "node:fs";
import { Window } from "happy-dom";
import { initialState, reduce, type ConsoleState } from "../src/state.js";
import type { EngineEvent, StateSummary } from "../src/types.js";

export type Fixture = {
  summary: StateSummary;
  events: EngineEvent[];
};

export function loadFixture(name: string): Fixture {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as Fixture;
}

export const FIXED_MS = 1_700_000_000_000;

/** Fold a list of engine events through the reducer at a fixed wall clock. */
export function replay(
  events: EngineEvent[],
  from?: ConsoleState,
  atMs: number = FIXED_MS,
): ConsoleState {
  let state = from ?? initialState();
  for (const event of events) {
    state = reduce(state, { type: "engine_event", event, atMs });
  }
  return state;
}

export function sliceUpTo(events: EngineEvent[], kind: string): EngineEvent[] {
  const at = events.findIndex((e) => e.kind === kind);
  if (at < 0) throw new Error(`no ${kind} in fixture`);
  return events.slice(0, at + 1);
}

export type DomSandbox = {
  window: Window;
  root: HTMLElement;
};

export function createDom(): DomSandbox {
  const window = new Window({ url: "http://localhost/" });
  const root = window.document.createElement("div");
  window.document.body.appendChild(root);
  return { window, root: root as unknown as HTMLElement };
}

export function setHtml(sandbox: DomSandbox, html: string): HTMLElement {
  sandbox.root.innerHTML = html;
  return sandbox.root;
}

/** Poll until fn() is truthy; throws with the label on timeout. */
export async function until<T>(
  fn: () => T | null | undefined | false,
  label: string,
  timeoutMs = 15_000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const got = fn();
    if (got) return got;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${label}`);
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}
