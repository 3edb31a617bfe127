// HTML renderers. Pure functions from ConsoleState to markup strings;
// main.ts swaps them into the page and handles clicks by delegation, so
// nothing here touches the DOM or the network.

import { escapeHtml, fmtClock, fmtNum, fmtParamValue } from "./format.js";
import type {
  AgentNode,
  ConsoleState,
  Notice,
  PendingCard,
} from "./state.js";
import type { Assessment, EngineEvent } from "./types.js";

const KIND_BADGES: Record<string, string> = {
  re_consent: "re-consent",
  acknowledgment: "acknowledge",
};

const OUTCOME_LABELS: Record<string, string> = {
  proceed: "proceed",
  notify_and_acknowledge: "notify-and-acknowledge",
  re_consent: "re-consent",
  halt: "halt",
};

export function renderApp(state: ConsoleState, nowMs: number): string {
  return `
${renderHeader(state)}
${renderBanner(state)}
<main class="cols">
  <section class="panel" id="chain-panel">
    <h2>delegation chain</h2>
    ${renderChain(state)}
  </section>
  <section class="panel" id="inbox-panel">
    <h2>pending requests</h2>
    ${renderNotices(state.notices)}
    ${renderInbox(state, nowMs)}
  </section>
  <section class="panel" id="activity-panel">
    <h2>outcomes</h2>
    ${renderOutcomes(state)}
    <h2>event feed</h2>
    ${renderFeed(state)}
  </section>
</main>`;
}

function renderHeader(state: ConsoleState): string {
  const run = state.finished ? "finished" : state.running ? "running" : "paused";
  const budget =
    state.budgetMs > 0
      ? `<span class="stat">p99 ${fmtNum(state.latencyP99Ms, 2)}ms ${
          state.budgetOk ? "within" : "OVER"
        } ${fmtNum(state.budgetMs, 0)}ms budget</span>`
      : "";
  return `
<header>
  <span class="dot ${escapeHtml(state.connection)}"></span>
  <h1>${escapeHtml(state.scenario || "consent console")}</h1>
  <span class="stat">profile <b>${escapeHtml(state.profile || "?")}</b></span>
  <span class="stat">t=<b>${fmtClock(state.time)}</b></span>
  <span class="stat" data-run-state="${run}">${run}</span>
  <span class="stat">events <b data-event-count>${state.eventCount}</b></span>
  ${budget}
  <span class="controls">
    <button data-action="control" data-verb="start" ${
      state.running || state.finished ? "disabled" : ""
    }>start</button>
    <button data-action="control" data-verb="pause" ${state.running ? "" : "disabled"}>pause</button>
    <button data-action="control" data-verb="step" ${state.finished ? "disabled" : ""}>step</button>
  </span>
</header>`;
}

function renderBanner(state: ConsoleState): string {
  if (state.connection !== "lost") return "";
  return `<div class="banner" data-testid="conn-banner">event stream lost; reconnecting</div>`;
}

// ---- chain panel ----------------------------------------------------------

export function renderChain(state: ConsoleState): string {
  const consents = Object.values(state.consents);
  const chained = Object.values(state.agents).filter((a) => a.depth !== null);
  if (consents.length === 0 && chained.length === 0) {
    return `<div class="empty" data-testid="chain-empty">no consent granted yet</div>`;
  }

  const humans = consents
    .map((c) => {
      const withdraw =
        c.status === "active"
          ? `<button class="danger" data-action="withdraw" data-human="${escapeHtml(
              c.humanId,
            )}">withdraw</button>`
          : "";
      return `<div class="node human ${escapeHtml(c.status)}" data-node="${escapeHtml(
        c.humanId,
      )}"><b>${escapeHtml(c.humanId)}</b><span class="tag">${escapeHtml(
        c.status,
      )}</span>${withdraw}</div>`;
    })
    .join("");

  const byDepth = new Map<number, AgentNode[]>();
  for (const agent of chained) {
    const depth = agent.depth ?? 0;
    const bucket = byDepth.get(depth) ?? [];
    bucket.push(agent);
    byDepth.set(depth, bucket);
  }
  const columns = [...byDepth.keys()]
    .sort((a, b) => a - b)
    .map((depth) => {
      const chips = (byDepth.get(depth) ?? [])
        .sort((a, b) => a.id.localeCompare(b.id))
        .map(renderAgentChip)
        .join("");
      return `<span class="hop">&rarr;</span><div class="col">${chips}</div>`;
    })
    .join("");

  const outsiders = Object.values(state.agents).filter((a) => a.depth === null);
  const outsideRow =
    outsiders.length > 0
      ? `<div class="outside">outside the chain: ${outsiders
          .map(
            (a) =>
              `<span class="node loose" data-node="${escapeHtml(a.id)}">${escapeHtml(
                a.id,
              )}${a.role ? ` <i>${escapeHtml(a.role)}</i>` : ""}</span>`,
          )
          .join(" ")}</div>`
      : "";

  const grantRows = consents
    .filter((c) => c.rootAgent !== null)
    .map(
      (c) =>
        `<div class="edge grant" data-grant="${escapeHtml(c.consentId)}">${escapeHtml(
          c.humanId,
        )} &rArr; ${escapeHtml(c.rootAgent ?? "")} <span class="ctx">grant ${escapeHtml(
          c.consentId,
        )} at ${fmtClock(c.grantedAt ?? 0)}</span></div>`,
    )
    .join("");
  const edgeRows = state.edges
    .map(
      (e) =>
        `<div class="edge" data-edge="${escapeHtml(`${e.from}>${e.to}`)}" data-drift="${fmtNum(
          e.drift,
          4,
        )}">${escapeHtml(e.from)} &rarr; ${escapeHtml(e.to)} <span class="drift">drift ${fmtNum(
          e.drift,
          2,
        )}</span>${
          e.contextDelta.length > 0
            ? ` <span class="ctx">${escapeHtml(e.contextDelta.join(", "))}</span>`
            : ""
        }</div>`,
    )
    .join("");

  return `
<div class="chain-cols"><div class="col">${humans}</div>${columns}</div>
${outsideRow}
<div class="edges">${grantRows}${edgeRows}</div>`;
}

function renderAgentChip(agent: AgentNode): string {
  const creep =
    agent.scopeCreep !== null && agent.scopeCreep > 0
      ? `<span class="creep">creep ${fmtNum(agent.scopeCreep, 2)}</span>`
      : "";
  const cut =
    agent.withdrawnAt !== null
      ? `<span class="cut">cut off ${fmtClock(agent.withdrawnAt)}</span>`
      : "";
  return `<div class="node agent${
    agent.withdrawnAt !== null ? " withdrawn" : ""
  }" data-node="${escapeHtml(agent.id)}" data-depth="${agent.depth ?? ""}"><b>${escapeHtml(
    agent.id,
  )}</b><span class="depth">D${agent.depth ?? "?"}</span>${
    agent.role ? `<span class="role">${escapeHtml(agent.role)}</span>` : ""
  }${creep}${cut}</div>`;
}

// ---- inbox ----------------------------------------------------------------

function renderNotices(notices: Notice[]): string {
  if (notices.length === 0) return "";
  return notices
    .map(
      (n) =>
        `<div class="notice" data-notice="${n.id}"><b>${escapeHtml(n.code)}</b> ${escapeHtml(
          n.message,
        )}${
          n.requestId ? ` <span class="ctx">(${escapeHtml(n.requestId)})</span>` : ""
        } <button data-action="dismiss" data-notice-id="${n.id}">dismiss</button></div>`,
    )
    .join("");
}

export function renderInbox(state: ConsoleState, nowMs: number): string {
  if (state.pending.length === 0) {
    return `<div class="empty" data-testid="inbox-empty">nothing waiting on you</div>`;
  }
  return state.pending.map((card) => renderCard(card, state, nowMs)).join("");
}

function renderCard(card: PendingCard, state: ConsoleState, nowMs: number): string {
  const command = state.commands[card.requestId];
  const sending = command?.phase === "sending";
  const badge = KIND_BADGES[card.kind] ?? card.kind;

  const params = Object.entries(card.params)
    .map(
      ([key, value]) =>
        `<tr data-param="${escapeHtml(key)}"><td>${escapeHtml(key)}</td><td>${escapeHtml(
          fmtParamValue(value),
        )}</td></tr>`,
    )
    .join("");
  const paramsTable = params
    ? `<table class="params"><tbody>${params}</tbody></table>`
    : `<div class="ctx">no parameters</div>`;

  const hops =
    card.chain.length > 0
      ? `<div class="hops">via ${card.chain
          .map(
            (h) =>
              `${escapeHtml(h.from_agent)} &rarr; ${escapeHtml(h.to_agent)} (drift ${fmtNum(
                h.drift,
                2,
              )})`,
          )
          .join(", ")}</div>`
      : "";

  const windowSecs = card.deadline - card.issuedAt;
  const leftSecs = Math.max(0, windowSecs - (nowMs - card.receivedAtMs) / 1000);
  const deadline = `<div class="deadline" data-remaining="${Math.round(
    leftSecs,
  )}">answer window ${fmtNum(windowSecs, 0)}s, about ${fmtNum(leftSecs, 0)}s left</div>`;

  const buttons =
    card.kind === "acknowledgment"
      ? `<button data-action="answer" data-request="${escapeHtml(
          card.requestId,
        )}" data-verdict="grant" ${sending ? "disabled" : ""}>acknowledge</button>`
      : `<button class="ok" data-action="answer" data-request="${escapeHtml(
          card.requestId,
        )}" data-verdict="grant" ${sending ? "disabled" : ""}>grant</button>
         <button class="danger" data-action="answer" data-request="${escapeHtml(
           card.requestId,
         )}" data-verdict="deny" ${sending ? "disabled" : ""}>deny</button>`;
  const commandNote = sending
    ? `<span class="ctx">sending ${escapeHtml(command?.verdict ?? "")}</span>`
    : command?.phase === "failed"
      ? `<span class="cmd-error" data-card-error>${escapeHtml(command.error ?? "failed")}</span>`
      : "";

  return `
<article class="card ${escapeHtml(card.kind)}" data-card="${escapeHtml(card.requestId)}">
  <div class="card-head"><span class="kind-badge">${escapeHtml(badge)}</span>
    <b>${escapeHtml(card.label)}</b>
    <span class="agent">${escapeHtml(card.agent)}</span></div>
  <div class="card-sub">${escapeHtml(card.actionClass)} @ ${escapeHtml(card.zone)}
    &middot; action ${escapeHtml(card.actionId)}${
      card.reason ? ` &middot; ${escapeHtml(card.reason)}` : ""
    }</div>
  ${paramsTable}
  ${renderGauge(card.assessment)}
  ${hops}
  ${deadline}
  <div class="actions">${buttons}${commandNote}</div>
</article>`;
}

// ---- severity gauge -------------------------------------------------------

const GAUGE_PARTS: Array<{ key: keyof Assessment; label: string; clampKey?: keyof Assessment }> = [
  { key: "ir", label: "irreversibility" },
  { key: "dt_hat", label: "time since grant", clampKey: "dt_clamped" },
  { key: "d_hat", label: "chain depth", clampKey: "d_clamped" },
  { key: "ambiguity", label: "scope ambiguity" },
];

/** Four weighted component bars; their contributions sum to the total. */
export function renderGauge(a: Assessment): string {
  const rows = GAUGE_PARTS.map((part, i) => {
    const value = a[part.key] as number;
    const weight = a.weights[i];
    const contribution = weight * value;
    const clamped = part.clampKey && (a[part.clampKey] as boolean) ? " (clamped)" : "";
    return `<div class="grow" data-part="${part.key}" data-contrib="${fmtNum(contribution, 6)}">
  <span class="glabel">${part.label}${clamped}</span>
  <span class="gcalc">${fmtNum(weight, 2)} &times; ${fmtNum(value, 3)}</span>
  <div class="gbar"><div class="gfill" style="width:${(contribution * 100).toFixed(1)}%"></div></div>
  <span class="gval">${fmtNum(contribution, 3)}</span>
</div>`;
  }).join("");
  const over = a.gamma > a.threshold;
  return `<div class="gauge" data-gamma="${fmtNum(a.gamma, 6)}">
${rows}
<div class="gtotal ${over ? "over" : "under"}">
  <div class="gbar total"><div class="gfill" style="width:${(a.gamma * 100).toFixed(1)}%"></div>
    <div class="gmark" style="left:${(a.threshold * 100).toFixed(1)}%"></div></div>
  severity <b data-gamma-text>${fmtNum(a.gamma, 3)}</b> vs threshold ${fmtNum(a.threshold, 3)}
  &middot; ${escapeHtml(a.tier)} &middot; ${escapeHtml(a.profile)}
</div>
</div>`;
}

// ---- outcomes and feed ----------------------------------------------------

function renderOutcomes(state: ConsoleState): string {
  const label = (actionId: string) => state.actions[actionId]?.label ?? actionId;
  const executed = state.executed
    .map(
      (id) =>
        `<li data-executed-item="${escapeHtml(id)}"><b>${escapeHtml(id)}</b> ${escapeHtml(
          label(id),
        )}</li>`,
    )
    .join("");
  const blocked = Object.entries(state.blocked)
    .map(
      ([id, cause]) =>
        `<li data-blocked-item="${escapeHtml(id)}"><b>${escapeHtml(id)}</b> ${escapeHtml(
          label(id),
        )} <span class="cause">${escapeHtml(cause)}</span></li>`,
    )
    .join("");
  return `
<div class="outcomes">
  <div><h3>executed (${state.executed.length})</h3><ul class="done">${executed}</ul></div>
  <div><h3>blocked (${Object.keys(state.blocked).length})</h3><ul class="stopped">${blocked}</ul></div>
</div>`;
}

function renderFeed(state: ConsoleState): string {
  if (state.feed.length === 0) {
    return `<div class="empty">no events yet</div>`;
  }
  const rows = [...state.feed]
    .reverse()
    .map((ev) => {
      const ref = feedRef(ev);
      return `<div class="frow" data-feed-seq="${ev.seq}" data-feed-kind="${escapeHtml(
        ev.kind,
      )}"${ref ? ` data-feed-ref="${escapeHtml(ref)}"` : ""}>
  <span class="ftime">${fmtClock(ev.time)}</span>
  <span class="fkind">${escapeHtml(ev.kind)}</span>
  <span class="fsum">${feedSummary(ev)}</span>
</div>`;
    })
    .join("");
  return `<div class="feed">${rows}</div>`;
}

function feedRef(ev: EngineEvent): string {
  const p = ev.payload;
  return String(p["action_id"] ?? p["request_id"] ?? p["consent_id"] ?? "");
}

function feedSummary(ev: EngineEvent): string {
  const p = ev.payload;
  const s = (key: string) => escapeHtml(String(p[key] ?? "?"));
  switch (ev.kind) {
    case "ConsentGranted":
      return `${s("human_id")} grants ${s("consent_id")} to ${s("to_agent")}`;
    case "DelegationRecorded":
      return `${s("from_agent")} delegates to ${s("to_agent")} (drift ${fmtNum(
        Number(p["drift"] ?? 0),
        2,
      )})`;
    case "ActionRequested":
      return `${s("agent")} requests ${s("action_id")}: ${s("label")}`;
    case "AssessmentMade": {
      const a = p["assessment"] as Assessment | undefined;
      return a
        ? `${s("action_id")} severity ${fmtNum(a.gamma, 3)} (${escapeHtml(a.tier)})`
        : s("action_id");
    }
    case "DecisionIssued": {
      const d = p["decision"] as { outcome?: string; reason?: string | null } | undefined;
      const outcome = OUTCOME_LABELS[d?.outcome ?? ""] ?? d?.outcome ?? "?";
      return `${s("action_id")}: ${escapeHtml(outcome)}${
        d?.reason ? ` (${escapeHtml(d.reason)})` : ""
      }`;
    }
    case "ActionExecuted":
      return `${s("action_id")} executed by ${s("agent")}`;
    case "ActionBlocked":
      return `${s("action_id")} blocked (${s("cause")})`;
    case "ReConsentRequested":
      return `re-consent asked for ${s("action_id")} (${s("reason")})`;
    case "ReConsentAnswered":
      return `${s("action_id")} answered: ${s("verdict")}`;
    case "Notified":
      return `notify for ${s("action_id")}, awaiting acknowledgment`;
    case "Acknowledged":
      return `${s("action_id")} acknowledged`;
    case "WithdrawalIssued":
      return `${s("human_id")} withdraws ${s("consent_id")}`;
    case "WithdrawalApplied":
      return `${s("consent_id")} cut off at ${s("agent")}`;
    default:
      return "";
  }
}
