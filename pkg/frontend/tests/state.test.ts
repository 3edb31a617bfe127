// Reducer projection tests against recorded wire traffic.

import { describe, expect, it } from "vitest";
import { initialState, reduce, type ConsoleState } from "../src/state.js";
import { FIXED_MS, loadFixture, replay, sliceUpTo } from "./helpers.js";

const s1 = loadFixture("scenario1_grant");
const s2 = loadFixture("scenario2_deny");
const s3 = loadFixture("scenario3_ack");
const s1w = loadFixture("scenario1_withdraw");
const s1t = loadFixture("scenario1_timeout");

describe("chain projection", () => {
  it("builds the linear care chain with depths and drifts", () => {
    const state = replay(s1.events);
    expect(state.agents["R_N"]?.depth).toBe(1);
    expect(state.agents["R_P"]?.depth).toBe(2);
    expect(state.agents["R_B"]?.depth).toBe(3);
    expect(state.consents["c1"]?.humanId).toBe("P");
    expect(state.consents["c1"]?.rootAgent).toBe("R_N");
    expect(state.edges).toHaveLength(2);
    expect(state.edges[0]).toMatchObject({ from: "R_N", to: "R_P" });
    expect(state.edges[0].drift).toBeCloseTo(1 / 3, 6);
    expect(state.edges[1]).toMatchObject({ from: "R_P", to: "R_B", drift: 0 });
  });

  it("builds the household chain through the hub", () => {
    const state = replay(s2.events);
    expect(state.agents["R_H"]?.depth).toBe(1);
    expect(state.agents["R_K"]?.depth).toBe(2);
    expect(state.agents["R_D"]?.depth).toBe(3);
    expect(state.edges.map((e) => `${e.from}>${e.to}`)).toEqual(["R_H>R_K", "R_K>R_D"]);
    expect(state.edges[0].drift).toBeCloseTo(1 / 7, 6);
    expect(state.consents["c1"]?.humanId).toBe("R");
  });

  it("records scope creep from delegation events", () => {
    const state = replay(s1.events);
    expect(state.agents["R_P"]?.scopeCreep).toBeCloseTo(1 / 3, 6);
    expect(state.agents["R_B"]?.scopeCreep).toBeCloseTo(1.0, 6);
  });
});

describe("pending requests", () => {
  it("adds a card when a re-consent request arrives", () => {
    const state = replay(sliceUpTo(s1.events, "ReConsentRequested"));
    expect(state.pending).toHaveLength(1);
    const card = state.pending[0];
    expect(card.requestId).toBe("reconsent:a-medication");
    expect(card.kind).toBe("re_consent");
    expect(card.agent).toBe("R_B");
    expect(card.assessment.gamma).toBeCloseTo(0.495, 9);
    expect(card.assessment.weights).toEqual([0.4, 0.2, 0.2, 0.2]);
    expect(card.params).toEqual({ medication: "oral tablet", dose: "5mg" });
    expect(card.receivedAtMs).toBe(FIXED_MS);
  });

  it("clears the card once the answer lands and the action executes", () => {
    const state = replay(s1.events);
    expect(state.pending).toHaveLength(0);
    expect(state.executed).toContain("a-medication");
    expect(state.blocked).toEqual({});
  });

  it("a denied action stays blocked while its sibling proceeds", () => {
    const state = replay(s2.events);
    expect(state.pending).toHaveLength(0);
    expect(state.blocked).toEqual({ "a-dispose": "denied" });
    expect(state.executed).toContain("a-tidy-office");
    expect(state.executed).not.toContain("a-dispose");
  });

  it("an unanswered request expiring server-side clears its card", () => {
    const mid = replay(sliceUpTo(s1t.events, "ReConsentRequested"));
    expect(mid.pending).toHaveLength(1);
    const state = replay(s1t.events);
    expect(state.pending).toHaveLength(0);
    expect(state.blocked["a-medication"]).toBe("oracle-timeout");
    expect(state.executed).not.toContain("a-medication");
  });

  it("acknowledgment cards resolve through Acknowledged", () => {
    const mid = replay(sliceUpTo(s3.events, "Notified"));
    expect(mid.pending).toHaveLength(1);
    expect(mid.pending[0].kind).toBe("acknowledgment");
    const done = replay(s3.events);
    expect(done.pending).toHaveLength(0);
    expect(done.executed).toContain("a-reroute");
  });
});

describe("withdrawal", () => {
  it("marks the consent withdrawn and each agent cut off", () => {
    const state = replay(s1w.events);
    expect(state.consents["c1"]?.status).toBe("withdrawn");
    expect(state.agents["R_N"]?.withdrawnAt).not.toBeNull();
    expect(state.agents["R_B"]?.withdrawnAt).not.toBeNull();
  });
});

describe("replay discipline", () => {
  it("feeding the same events twice changes nothing", () => {
    const once = replay(s1.events);
    const twice = replay(s1.events, once);
    expect(twice).toEqual(once);
  });

  it("a snapshot plus full replay does not double edges or executions", () => {
    let state = reduce(initialState(), { type: "snapshot", summary: s1.summary });
    state = replay(s1.events, state);
    expect(state.edges).toHaveLength(2);
    expect(state.executed.filter((id) => id === "a-pillow")).toHaveLength(1);
    // snapshot carries the roles that events never mention
    expect(state.agents["R_N"]?.role).toBe("nurse assistant");
  });

  it("stale sequence numbers are ignored even with gaps ahead", () => {
    const events = sliceUpTo(s1.events, "ReConsentRequested");
    const state = replay(events);
    const repeat = reduce(state, {
      type: "engine_event",
      event: events[3],
      atMs: FIXED_MS,
    });
    expect(repeat).toEqual(state);
  });
});

describe("commands and notices", () => {
  function withPending(): ConsoleState {
    return replay(sliceUpTo(s1.events, "ReConsentRequested"));
  }

  it("tracks an answer from sending to confirmed", () => {
    let state = withPending();
    state = reduce(state, {
      type: "command_sent",
      requestId: "reconsent:a-medication",
      verdict: "grant",
    });
    expect(state.commands["reconsent:a-medication"]?.phase).toBe("sending");
    const rest = s1.events.filter((e) => e.seq > state.lastSeq);
    state = replay(rest, state);
    expect(state.commands["reconsent:a-medication"]?.phase).toBe("confirmed");
    expect(state.pending).toHaveLength(0);
  });

  it("a failed command surfaces a sticky notice", () => {
    let state = withPending();
    state = reduce(state, {
      type: "command_sent",
      requestId: "reconsent:a-medication",
      verdict: "grant",
    });
    state = reduce(state, {
      type: "command_failed",
      requestId: "reconsent:a-medication",
      code: "DeadlineExpired",
      message: "answer window closed",
    });
    expect(state.commands["reconsent:a-medication"]?.phase).toBe("failed");
    expect(state.notices).toHaveLength(1);
    expect(state.notices[0].code).toBe("DeadlineExpired");
    state = reduce(state, { type: "dismiss_notice", id: state.notices[0].id });
    expect(state.notices).toHaveLength(0);
  });

  it("connection status is part of the projection", () => {
    let state = initialState();
    expect(state.connection).toBe("connecting");
    state = reduce(state, { type: "connection", status: "lost" });
    expect(state.connection).toBe("lost");
    state = reduce(state, { type: "connection", status: "live" });
    expect(state.connection).toBe("live");
  });
});
