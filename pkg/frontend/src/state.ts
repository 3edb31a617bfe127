// Single state reducer. Every panel in the console is a projection of
// ConsoleState, and ConsoleState changes only through reduce(), fed by
// stream events, fetched snapshots, and the operator's own commands.
// Replayed events are dropped by sequence number, so a reconnect that
// re-delivers history cannot double anything.

import type { StreamStatus } from "./stream.js";
import type {
  Assessment,
  ChainHop,
  EngineEvent,
  PendingRequestWire,
  RequestKind,
  StateSummary,
  Verdict,
} from "./types.js";

export type CommandPhase = "sending" | "confirmed" | "failed";

export type CommandState = {
  requestId: string;
  verdict: Verdict;
  phase: CommandPhase;
  error?: string;
};

export type AgentNode = {
  id: string;
  role: string;
  depth: number | null;
  inChain: boolean;
  scopeCreep: number | null;
  withdrawnAt: number | null;
};

export type ChainEdge = {
  consentId: string;
  from: string;
  to: string;
  drift: number;
  at: number;
  contextDelta: string[];
};

export type ConsentRow = {
  consentId: string;
  humanId: string;
  status: string;
  rootAgent: string | null;
  grantedAt: number | null;
};

export type PendingCard = {
  requestId: string;
  actionId: string;
  kind: RequestKind;
  agent: string;
  actionClass: string;
  zone: string;
  label: string;
  params: Record<string, unknown>;
  issuedAt: number;
  deadline: number;
  reason: string | null;
  assessment: Assessment;
  chain: ChainHop[];
  receivedAtMs: number;
};

export type Notice = {
  id: number;
  requestId: string;
  code: string;
  message: string;
};

export type ActionInfo = {
  actionId: string;
  agent: string;
  actionClass: string;
  zone: string;
  label: string;
};

export type ConsoleState = {
  scenario: string;
  description: string;
  profile: string;
  time: number;
  running: boolean;
  finished: boolean;
  connection: StreamStatus;
  lastSeq: number;
  eventCount: number;
  latencyP99Ms: number;
  budgetMs: number;
  budgetOk: boolean;
  agents: Record<string, AgentNode>;
  edges: ChainEdge[];
  consents: Record<string, ConsentRow>;
  pending: PendingCard[];
  commands: Record<string, CommandState>;
  notices: Notice[];
  noticeSeq: number;
  feed: EngineEvent[];
  actions: Record<string, ActionInfo>;
  executed: string[];
  blocked: Record<string, string>;
};

export type Msg =
  | { type: "snapshot"; summary: StateSummary }
  | { type: "engine_event"; event: EngineEvent; atMs: number }
  | { type: "connection"; status: StreamStatus }
  | { type: "command_sent"; requestId: string; verdict: Verdict }
  | { type: "command_failed"; requestId: string; code: string; message: string }
  | { type: "notice"; requestId: string; code: string; message: string }
  | { type: "dismiss_notice"; id: number };

const FEED_LIMIT = 400;

export function initialState(): ConsoleState {
  return {
    scenario: "",
    description: "",
    profile: "",
    time: 0,
    running: false,
    finished: false,
    connection: "connecting",
    lastSeq: -1,
    eventCount: 0,
    latencyP99Ms: 0,
    budgetMs: 0,
    budgetOk: true,
    agents: {},
    edges: [],
    consents: {},
    pending: [],
    commands: {},
    notices: [],
    noticeSeq: 0,
    feed: [],
    actions: {},
    executed: [],
    blocked: {},
  };
}

export function reduce(state: ConsoleState, msg: Msg): ConsoleState {
  switch (msg.type) {
    case "snapshot":
      return applySnapshot(state, msg.summary);
    case "engine_event":
      return applyEvent(state, msg.event, msg.atMs);
    case "connection":
      return { ...state, connection: msg.status };
    case "command_sent":
      return {
        ...state,
        commands: {
          ...state.commands,
          [msg.requestId]: {
            requestId: msg.requestId,
            verdict: msg.verdict,
            phase: "sending",
          },
        },
      };
    case "command_failed": {
      const prior = state.commands[msg.requestId];
      const commands = prior
        ? {
            ...state.commands,
            [msg.requestId]: { ...prior, phase: "failed" as const, error: msg.message },
          }
        : state.commands;
      return pushNotice({ ...state, commands }, msg.requestId, msg.code, msg.message);
    }
    case "notice":
      return pushNotice(state, msg.requestId, msg.code, msg.message);
    case "dismiss_notice":
      return { ...state, notices: state.notices.filter((n) => n.id !== msg.id) };
  }
}

function pushNotice(
  state: ConsoleState,
  requestId: string,
  code: string,
  message: string,
): ConsoleState {
  const id = state.noticeSeq + 1;
  return {
    ...state,
    noticeSeq: id,
    notices: [...state.notices, { id, requestId, code, message }],
  };
}

function applySnapshot(state: ConsoleState, summary: StateSummary): ConsoleState {
  let agents = state.agents;
  for (const a of summary.agents) {
    agents = withAgent(agents, a.id, {
      role: a.role,
      inChain: a.in_chain,
      ...(a.depth !== undefined ? { depth: a.depth } : {}),
    });
  }
  let consents = state.consents;
  for (const c of summary.consents) {
    consents = {
      ...consents,
      [c.consent_id]: {
        consentId: c.consent_id,
        humanId: c.human_id,
        status: c.status,
        rootAgent: c.root_agent,
        grantedAt: c.granted_at,
      },
    };
  }
  let edges = state.edges;
  for (const e of summary.edges) {
    edges = upsertEdge(edges, {
      consentId: e.consent_id,
      from: e.from_agent,
      to: e.to_agent,
      drift: e.drift,
      at: e.timestamp,
      contextDelta: e.context_delta,
    });
  }
  const executed = [...state.executed];
  for (const id of summary.executed) {
    if (!executed.includes(id)) executed.push(id);
  }
  return {
    ...state,
    scenario: summary.scenario,
    description: summary.description,
    profile: summary.profile,
    time: Math.max(state.time, summary.time),
    running: summary.running,
    finished: summary.finished,
    eventCount: Math.max(state.eventCount, summary.event_count),
    latencyP99Ms: summary.latency.p99_ms,
    budgetMs: summary.decision_budget_ms,
    budgetOk: summary.budget_ok,
    agents,
    consents,
    edges,
    executed,
    blocked: { ...state.blocked, ...summary.blocked },
  };
}

function applyEvent(state: ConsoleState, ev: EngineEvent, atMs: number): ConsoleState {
  if (ev.seq <= state.lastSeq) {
    return state; // replayed frame after a reconnect
  }
  const next: ConsoleState = {
    ...state,
    lastSeq: ev.seq,
    eventCount: Math.max(state.eventCount, ev.seq + 1),
    time: Math.max(state.time, ev.time),
    feed: [...state.feed, ev].slice(-FEED_LIMIT),
  };
  const p = ev.payload;
  switch (ev.kind) {
    case "ConsentGranted": {
      const consentId = str(p, "consent_id");
      next.consents = {
        ...next.consents,
        [consentId]: {
          consentId,
          humanId: str(p, "human_id"),
          status: "active",
          rootAgent: str(p, "to_agent"),
          grantedAt: ev.time,
        },
      };
      next.agents = withAgent(next.agents, str(p, "to_agent"), {
        depth: 1,
        inChain: true,
      });
      break;
    }
    case "DelegationRecorded": {
      const from = str(p, "from_agent");
      const to = str(p, "to_agent");
      next.agents = withAgent(next.agents, from, { inChain: true });
      next.agents = withAgent(next.agents, to, {
        depth: num(p, "depth"),
        inChain: true,
        scopeCreep: num(p, "scope_creep"),
      });
      next.edges = upsertEdge(next.edges, {
        consentId: str(p, "consent_id"),
        from,
        to,
        drift: num(p, "drift"),
        at: num(p, "timestamp"),
        contextDelta: (p["context_delta"] as string[] | undefined) ?? [],
      });
      break;
    }
    case "ActionRequested": {
      const actionId = str(p, "action_id");
      next.actions = {
        ...next.actions,
        [actionId]: {
          actionId,
          agent: str(p, "agent"),
          actionClass: str(p, "action_class"),
          zone: str(p, "zone"),
          label: str(p, "label"),
        },
      };
      break;
    }
    case "ActionExecuted": {
      const actionId = str(p, "action_id");
      if (!next.executed.includes(actionId)) {
        next.executed = [...next.executed, actionId];
      }
      next.pending = next.pending.filter((c) => c.actionId !== actionId);
      break;
    }
    case "ActionBlocked": {
      // an unanswered request can resolve server-side (deadline timeout);
      // the block is the only event that closes it, so clear the card here
      const actionId = str(p, "action_id");
      next.blocked = { ...next.blocked, [actionId]: str(p, "cause") };
      next.pending = next.pending.filter((c) => c.actionId !== actionId);
      break;
    }
    case "ReConsentRequested":
    case "Notified": {
      const wire = p as unknown as PendingRequestWire;
      const existing = next.pending.find((c) => c.requestId === wire.request_id);
      next.pending = upsertCard(next.pending, {
        requestId: wire.request_id,
        actionId: wire.action_id,
        kind: wire.kind,
        agent: wire.agent,
        actionClass: wire.action_class,
        zone: wire.zone,
        label: wire.label,
        params: wire.params,
        issuedAt: wire.issued_at,
        deadline: wire.deadline,
        reason: wire.reason,
        assessment: wire.assessment,
        chain: wire.chain,
        receivedAtMs: existing ? existing.receivedAtMs : atMs,
      });
      break;
    }
    case "ReConsentAnswered":
    case "Acknowledged": {
      const requestId = str(p, "request_id");
      next.pending = next.pending.filter((c) => c.requestId !== requestId);
      const command = next.commands[requestId];
      if (command && command.phase === "sending") {
        next.commands = {
          ...next.commands,
          [requestId]: { ...command, phase: "confirmed" },
        };
      }
      break;
    }
    case "WithdrawalIssued": {
      const consentId = str(p, "consent_id");
      const row = next.consents[consentId];
      if (row) {
        next.consents = {
          ...next.consents,
          [consentId]: { ...row, status: "withdrawn" },
        };
      }
      break;
    }
    case "WithdrawalApplied":
      next.agents = withAgent(next.agents, str(p, "agent"), {
        withdrawnAt: ev.time,
      });
      break;
    default:
      break; // assessment/decision events only feed the timeline
  }
  return next;
}

function withAgent(
  agents: Record<string, AgentNode>,
  id: string,
  patch: Partial<AgentNode>,
): Record<string, AgentNode> {
  const current = agents[id] ?? {
    id,
    role: "",
    depth: null,
    inChain: false,
    scopeCreep: null,
    withdrawnAt: null,
  };
  return { ...agents, [id]: { ...current, ...patch } };
}

function upsertEdge(edges: ChainEdge[], edge: ChainEdge): ChainEdge[] {
  const key = (e: ChainEdge) => `${e.consentId}|${e.from}|${e.to}`;
  const at = edges.findIndex((e) => key(e) === key(edge));
  if (at < 0) return [...edges, edge];
  const copy = [...edges];
  copy[at] = edge;
  return copy;
}

function upsertCard(cards: PendingCard[], card: PendingCard): PendingCard[] {
  const at = cards.findIndex((c) => c.requestId === card.requestId);
  if (at < 0) return [...cards, card];
  const copy = [...cards];
  copy[at] = card;
  return copy;
}

function str(payload: Record<string, unknown>, key: string): string {
  return String(payload[key] ?? "");
}

function num(payload: Record<string, unknown>, key: string): number {
  return Number(payload[key] ?? 0);
}
