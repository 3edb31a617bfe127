// Wire types for the consent service HTTP + event-stream API.
// These mirror the JSON the service emits; the console never imports
// engine code, so any drift shows up as a failing test, not a type error.

/** One engine event as delivered on the stream (and stored in logs). */
export type EngineEvent = {
  time: number;
  seq: number;
  kind: string;
  payload: Record<string, unknown>;
};

export type DecisionInfo = {
  outcome: string;
  reason: string | null;
  detail: string;
};

/** Severity assessment attached to decisions and pending requests. */
export type Assessment = {
  ir: number;
  dt_hat: number;
  d_hat: number;
  ambiguity: number;
  dt_clamped: boolean;
  d_clamped: boolean;
  profile: string;
  /* component order: irreversibility, time gap, depth, ambiguity */
  weights: [number, number, number, number];
  threshold: number;
  gamma: number;
  tier: string;
  decision: DecisionInfo;
};

export type ChainHop = {
  from_agent: string;
  to_agent: string;
  drift: number;
  timestamp: number;
  context_delta: string[];
};

export type RequestKind = "re_consent" | "acknowledgment";

/** Pending request as served by GET /requests and the request events. */
export type PendingRequestWire = {
  request_id: string;
  action_id: string;
  kind: RequestKind;
  agent: string;
  action_class: string;
  zone: string;
  label: string;
  params: Record<string, unknown>;
  issued_at: number;
  deadline: number;
  reason: string | null;
  assessment: Assessment;
  chain: ChainHop[];
  seconds_left?: number;
};

export type AgentSummary = {
  id: string;
  role: string;
  in_chain: boolean;
  consent_id?: string;
  depth?: number;
  scope_size?: number;
};

export type ConsentSummary = {
  consent_id: string;
  human_id: string;
  status: string;
  root_agent: string | null;
  granted_at: number | null;
  scope_size: number;
  ambiguity: number;
};

export type EdgeSummary = {
  consent_id: string;
  from_agent: string;
  to_agent: string;
  drift: number;
  timestamp: number;
  context_delta: string[];
};

export type LatencySummary = {
  count: number;
  p50_ms: number;
  p99_ms: number;
  max_ms: number;
};

/** GET /state response. */
export type StateSummary = {
  scenario: string;
  description: string;
  profile: string;
  time: number;
  agents: AgentSummary[];
  consents: ConsentSummary[];
  edges: EdgeSummary[];
  pending: string[];
  executed: string[];
  blocked: Record<string, string>;
  event_count: number;
  latency: LatencySummary;
  running: boolean;
  finished: boolean;
  decision_budget_ms: number;
  budget_ok: boolean;
};

export type Verdict = "grant" | "deny";
export type ControlVerb = "start" | "pause" | "step";
