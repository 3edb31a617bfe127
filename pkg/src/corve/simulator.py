"""Deterministic discrete-event simulation of delegation scenarios.

The simulator advances a virtual clock over a script of timed operations
(grants, delegations, action requests, withdrawals, context changes) and
runs every requested action through the full three-layer decision path.
Humans are represented by a consent oracle; re-consent requests the oracle
does not answer resolve to deny after the scenario's timeout window.

Two runs with the same scenario and oracle produce byte-identical event
logs: the clock is virtual, event payloads hold only simulation time, and
wall-clock decision latencies are kept in a side-channel statistics object.
"""

from __future__ import annotations

import heapq
import json
import time as _time
from dataclasses import dataclass, field
from typing import Any

from .consent import (
    ActionInstance,
    ConsentStatus,
    ConsentTuple,
    ScopeSet,
    consent_from_obj,
    consent_to_obj,
    in_scope,
    materialize_scope,
    status_at,
    withdraw,
)
from .delegation import (
    DelegationEdge,
    ProvenanceGraph,
    chain_provenance,
    effective_consent,
    new_graph,
    record_delegation,
    scope_creep_of,
)
from .errors import (
    AlreadyAnswered,
    CorveError,
    ExpiredConsent,
    MalformedSpec,
    SchemaViolation,
    UnknownAgentReference,
    UnknownHuman,
    UnknownRequest,
    WithdrawnConsent,
)
from .irreversibility import IrreversibilityCatalog, ir_score
from .policy import Decision, Outcome, PolicyProfile, compute_gamma, decide, normalize_components
from .resources import load_catalog, load_consent, load_profile

EVENT_KINDS = (
    "ConsentGranted",
    "DelegationRecorded",
    "ActionRequested",
    "AssessmentMade",
    "DecisionIssued",
    "ReConsentRequested",
    "ReConsentAnswered",
    "ActionExecuted",
    "ActionBlocked",
    "WithdrawalIssued",
    "WithdrawalApplied",
    "Notified",
    "Acknowledged",
)

RE_CONSENT = "re_consent"
ACKNOWLEDGMENT = "acknowledgment"

GRANT = "grant"
DENY = "deny"


# ---------------------------------------------------------------- events


@dataclass(frozen=True, slots=True)
class SimEvent:
    """One timestamped record in the append-only simulation log."""

    time: float
    seq: int
    kind: str
    payload: dict

    def to_json_obj(self) -> dict:
        return {"time": self.time, "seq": self.seq, "kind": self.kind, "payload": self.payload}

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict) -> SimEvent:
        return cls(
            time=obj["time"], seq=obj["seq"], kind=obj["kind"], payload=obj["payload"]
        )


# ---------------------------------------------------------------- scenario


@dataclass(frozen=True, slots=True)
class AgentSpec:
    id: str
    role: str = ""


@dataclass(frozen=True, slots=True)
class ConsentRef:
    id: str
    document: ConsentTuple


@dataclass(frozen=True, slots=True)
class GrantOp:
    time: float
    consent_id: str
    to_agent: str


@dataclass(frozen=True, slots=True)
class DelegateOp:
    time: float
    consent_id: str
    from_agent: str
    to_agent: str
    delegated: ScopeSet
    interpreted: ScopeSet
    context_delta: frozenset[str]


@dataclass(frozen=True, slots=True)
class RequestActionOp:
    time: float
    consent_id: str
    action_id: str
    agent: str
    action_class: str
    zone: str
    label: str = ""
    params: dict = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class WithdrawOp:
    time: float
    consent_id: str


@dataclass(frozen=True, slots=True)
class ContextChangeOp:
    time: float
    keys: frozenset[str]


ScriptOp = GrantOp | DelegateOp | RequestActionOp | WithdrawOp | ContextChangeOp


@dataclass(frozen=True, slots=True)
class ScenarioSpec:
    """Validated scenario: resolved profile/catalog, agents, consents, script."""

    name: str
    description: str
    profile: PolicyProfile
    catalog: IrreversibilityCatalog
    bucket_width: float
    message_latency: float
    reconsent_timeout: float
    seed: int
    pause_chain_on_reconsent: bool
    agents: tuple[AgentSpec, ...]
    consents: tuple[ConsentRef, ...]
    script: tuple[ScriptOp, ...]

    def agent_ids(self) -> frozenset[str]:
        return frozenset(a.id for a in self.agents)

    def consent(self, consent_id: str) -> ConsentRef:
        for ref in self.consents:
            if ref.id == consent_id:
                return ref
        raise MalformedSpec(f"unknown consent id {consent_id!r}")


def _expand_scope_blocks(blocks: Any, width: float, where: str) -> ScopeSet:
    """Expand [{action_classes, zones, buckets: [first, last]}, ...] blocks."""
    if not isinstance(blocks, list):
        raise MalformedSpec(f"{where}: scope blocks must be a list")
    triples: set[tuple[str, str, int]] = set()
    for block in blocks:
        if not isinstance(block, dict) or block.keys() != {
            "action_classes",
            "zones",
            "buckets",
        }:
            raise MalformedSpec(f"{where}: bad scope block {block!r}")
        first, last = block["buckets"]
        if first > last:
            raise MalformedSpec(f"{where}: bucket range {first}..{last} is inverted")
        for a in block["action_classes"]:
            for z in block["zones"]:
                for b in range(int(first), int(last) + 1):
                    triples.add((str(a), str(z), b))
    return ScopeSet(frozenset(triples), width)


def load_scenario(doc: bytes | str) -> ScenarioSpec:
    """Parse and cross-validate a scenario file.

    Checks performed: non-decreasing script timestamps, all referenced
    agents declared, consent ids resolvable, grant precedes any other use
    of a consent, unique action ids, and resolvable profile/catalog names.
    """
    if isinstance(doc, bytes):
        doc = doc.decode("utf-8")
    try:
        raw = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise MalformedSpec(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedSpec("scenario root must be a JSON object")

    try:
        name = str(raw["name"])
        profile = load_profile(str(raw["profile"]))
        catalog = load_catalog(str(raw["catalog"]))
        bucket_width = float(raw["bucket_width"])
        message_latency = float(raw.get("message_latency", 1.0))
        reconsent_timeout = float(raw.get("reconsent_timeout", 600.0))
        seed = int(raw.get("seed", 0))
        pause_chain = bool(raw.get("pause_chain_on_reconsent", False))
        agents_raw = raw["agents"]
        consents_raw = raw["consents"]
        script_raw = raw["script"]
    except KeyError as exc:
        raise MalformedSpec(f"scenario missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise MalformedSpec(f"scenario field has wrong type: {exc}") from exc

    if bucket_width <= 0:
        raise MalformedSpec("bucket_width must be positive")
    if message_latency < 0:
        raise MalformedSpec("message_latency must be non-negative")
    if reconsent_timeout <= 0:
        raise MalformedSpec("reconsent_timeout must be positive")

    agents = tuple(
        AgentSpec(id=str(a["id"]), role=str(a.get("role", ""))) for a in agents_raw
    )
    agent_ids = {a.id for a in agents}
    if len(agent_ids) != len(agents):
        raise MalformedSpec("duplicate agent id")

    consents = []
    for entry in consents_raw:
        cid = str(entry["id"])
        doc_ref = entry["document"]
        if isinstance(doc_ref, str):
            tup = load_consent(doc_ref)
        elif isinstance(doc_ref, dict):
            try:
                tup = consent_from_obj(doc_ref)
            except SchemaViolation:
                raise
        else:
            raise MalformedSpec(f"consent {cid!r}: document must be a name or object")
        consents.append(ConsentRef(id=cid, document=tup))
    consent_ids = {c.id for c in consents}
    if len(consent_ids) != len(consents):
        raise MalformedSpec("duplicate consent id")

    def check_agent(agent_id: str, where: str) -> str:
        if agent_id not in agent_ids:
            raise UnknownAgentReference(f"{where}: agent {agent_id!r} not declared")
        return agent_id

    def check_consent(cid: str, where: str) -> str:
        if cid not in consent_ids:
            raise MalformedSpec(f"{where}: consent {cid!r} not declared")
        return cid

    script: list[ScriptOp] = []
    granted: set[str] = set()
    action_ids: set[str] = set()
    last_time = float("-inf")
    for i, op_raw in enumerate(script_raw):
        where = f"script[{i}]"
        if not isinstance(op_raw, dict) or "op" not in op_raw or "time" not in op_raw:
            raise MalformedSpec(f"{where}: each entry needs 'op' and 'time'")
        t = float(op_raw["time"])
        if t < last_time:
            raise MalformedSpec(f"{where}: timestamps must be non-decreasing")
        last_time = t
        kind = op_raw["op"]
        if kind == "grant":
            cid = check_consent(str(op_raw["consent"]), where)
            if cid in granted:
                raise MalformedSpec(f"{where}: consent {cid!r} granted twice")
            granted.add(cid)
            script.append(GrantOp(t, cid, check_agent(str(op_raw["to_agent"]), where)))
        elif kind == "delegate":
            cid = check_consent(str(op_raw["consent"]), where)
            if cid not in granted:
                raise MalformedSpec(f"{where}: delegate before grant of {cid!r}")
            script.append(
                DelegateOp(
                    time=t,
                    consent_id=cid,
                    from_agent=check_agent(str(op_raw["from_agent"]), where),
                    to_agent=check_agent(str(op_raw["to_agent"]), where),
                    delegated=_expand_scope_blocks(op_raw["delegated"], bucket_width, where),
                    interpreted=_expand_scope_blocks(
                        op_raw["interpreted"], bucket_width, where
                    ),
                    context_delta=frozenset(
                        str(k) for k in op_raw.get("context_delta", [])
                    ),
                )
            )
        elif kind == "request_action":
            cid = check_consent(str(op_raw["consent"]), where)
            if cid not in granted:
                raise MalformedSpec(f"{where}: request before grant of {cid!r}")
            action_id = str(op_raw["action_id"])
            if action_id in action_ids:
                raise MalformedSpec(f"{where}: duplicate action id {action_id!r}")
            action_ids.add(action_id)
            script.append(
                RequestActionOp(
                    time=t,
                    consent_id=cid,
                    action_id=action_id,
                    agent=check_agent(str(op_raw["agent"]), where),
                    action_class=str(op_raw["action_class"]),
                    zone=str(op_raw["zone"]),
                    label=str(op_raw.get("label", "")),
                    params=op_raw.get("params", {}),
                )
            )
        elif kind == "withdraw":
            cid = check_consent(str(op_raw["consent"]), where)
            if cid not in granted:
                raise MalformedSpec(f"{where}: withdraw before grant of {cid!r}")
            script.append(WithdrawOp(t, cid))
        elif kind == "context_change":
            script.append(
                ContextChangeOp(t, frozenset(str(k) for k in op_raw.get("keys", [])))
            )
        else:
            raise MalformedSpec(f"{where}: unknown op {kind!r}")

    return ScenarioSpec(
        name=name,
        description=str(raw.get("description", "")),
        profile=profile,
        catalog=catalog,
        bucket_width=bucket_width,
        message_latency=message_latency,
        reconsent_timeout=reconsent_timeout,
        seed=seed,
        pause_chain_on_reconsent=pause_chain,
        agents=agents,
        consents=tuple(consents),
        script=tuple(script),
    )


# ---------------------------------------------------------------- oracles


class ConsentOracle:
    """Answers re-consent and acknowledgment requests in the human's stead.

    answer_for returns "grant", "deny", or None for no answer; unanswered
    requests time out to deny. Interactive oracles always return None and
    leave answers to externally injected commands.
    """

    interactive = False

    def __init__(self, response_latency: float = 30.0):
        if response_latency < 0:
            raise ValueError("response_latency must be non-negative")
        self.response_latency = response_latency

    def answer_for(self, request_id: str, kind: str) -> str | None:  # noqa: ARG002
        return None


class AlwaysGrantOracle(ConsentOracle):
    def answer_for(self, request_id: str, kind: str) -> str | None:
        return GRANT


class AlwaysDenyOracle(ConsentOracle):
    def answer_for(self, request_id: str, kind: str) -> str | None:
        return DENY


class ScriptedOracle(ConsentOracle):
    """Answers keyed by request id; requests without a key time out."""

    def __init__(self, answers: dict[str, str], response_latency: float = 30.0):
        super().__init__(response_latency)
        for rid, verdict in answers.items():
            if verdict not in (GRANT, DENY):
                raise ValueError(f"answer for {rid!r} must be 'grant' or 'deny'")
        self.answers = dict(answers)

    def answer_for(self, request_id: str, kind: str) -> str | None:
        return self.answers.get(request_id)


class InteractiveOracle(ConsentOracle):
    interactive = True

    def __init__(self):
        super().__init__(response_latency=0.0)


def make_oracle(spec: str, response_latency: float = 30.0) -> ConsentOracle:
    """Build an oracle from a CLI-style spec.

    "always-grant", "always-deny", "interactive", or a path to a JSON file
    mapping request ids to "grant"/"deny".
    """
    if spec == "always-grant":
        return AlwaysGrantOracle(response_latency)
    if spec == "always-deny":
        return AlwaysDenyOracle(response_latency)
    if spec == "interactive":
        return InteractiveOracle()
    try:
        with open(spec, encoding="utf-8") as fh:
            answers = json.load(fh)
    except OSError as exc:
        raise MalformedSpec(
            f"oracle must be always-grant, always-deny, interactive, "
            f"or an answers file: {exc}"
        ) from exc
    except json.JSONDecodeError as exc:
        raise MalformedSpec(f"oracle answers file is not valid JSON: {exc}") from exc
    if not isinstance(answers, dict):
        raise MalformedSpec("oracle answers file must be a JSON object")
    return ScriptedOracle(answers, response_latency)


def reconsent_request_id(action_id: str) -> str:
    return f"reconsent:{action_id}"


def ack_request_id(action_id: str) -> str:
    return f"ack:{action_id}"


# ---------------------------------------------------------------- state


@dataclass
class _ConsentState:
    ref: ConsentRef
    tuple_now: ConsentTuple
    graph: ProvenanceGraph | None = None
    scope: ScopeSet | None = None
    withdrawal_issued_at: float | None = None
    unattributed_context: set[str] = field(default_factory=set)


@dataclass
class PendingRequest:
    """A re-consent or acknowledgment waiting for the human."""

    request_id: str
    action_id: str
    kind: str
    consent_id: str
    agent: str
    op: RequestActionOp
    decision: Decision
    issued_at: float
    deadline: float
    terminal: bool = False


@dataclass(frozen=True, slots=True)
class OutcomeReport:
    """assert_outcome result: expectation, verdict, and evidence lines."""

    expectation: str
    passed: bool
    details: tuple[str, ...]

    def to_json_obj(self) -> dict:
        return {
            "expectation": self.expectation,
            "passed": self.passed,
            "details": list(self.details),
        }


class LatencyStats:
    """Wall-clock decision latencies, kept out of the event log."""

    def __init__(self) -> None:
        self.samples_s: list[float] = []

    def add(self, seconds: float) -> None:
        self.samples_s.append(seconds)

    def _percentile(self, q: float) -> float:
        if not self.samples_s:
            return 0.0
        ordered = sorted(self.samples_s)
        idx = max(0, min(len(ordered) - 1, int(q * len(ordered) + 0.999999) - 1))
        return ordered[idx]

    def summary(self) -> dict:
        return {
            "count": len(self.samples_s),
            "p50_ms": self._percentile(0.50) * 1000.0,
            "p99_ms": self._percentile(0.99) * 1000.0,
            "max_ms": max(self.samples_s, default=0.0) * 1000.0,
        }


# ---------------------------------------------------------------- engine


class Simulation:
    """Single-threaded virtual-clock engine over one scenario.

    External inputs (operator answers, withdrawals) enter as timed work
    items through schedule_answer / inject_withdrawal; the service module
    serializes its calls around a lock it owns.
    """

    def __init__(self, spec: ScenarioSpec, oracle: ConsentOracle):
        self.spec = spec
        self.oracle = oracle
        self.now = 0.0
        self.events: list[SimEvent] = []
        self.stats = LatencyStats()
        self.pending: dict[str, PendingRequest] = {}
        self._heap: list[tuple[float, int, str, Any]] = []
        self._order = 0
        self._seq = 0
        self._consents: dict[str, _ConsentState] = {
            ref.id: _ConsentState(ref=ref, tuple_now=ref.document)
            for ref in spec.consents
        }
        self._deferred: dict[str, list[RequestActionOp]] = {}
        self._executed: list[str] = []
        self._blocked: dict[str, str] = {}
        self._decisions: list[tuple[str, Decision]] = []
        self._subscribers: list[Any] = []
        for op in spec.script:
            self._schedule(op.time, "script", op)

    # -- scheduling

    def _schedule(self, at: float, kind: str, data: Any) -> None:
        heapq.heappush(self._heap, (at, self._order, kind, data))
        self._order += 1

    def _emit(self, kind: str, payload: dict) -> SimEvent:
        event = SimEvent(time=self.now, seq=self._seq, kind=kind, payload=payload)
        self._seq += 1
        self.events.append(event)
        for callback in self._subscribers:
            callback(event)
        return event

    def subscribe(self, callback) -> None:
        """Register a listener invoked synchronously on every new event."""
        self._subscribers.append(callback)

    # -- public drivers

    def step(self) -> bool:
        """Process the next work item; False when nothing is scheduled."""
        if not self._heap:
            return False
        at, _, kind, data = heapq.heappop(self._heap)
        self.now = max(self.now, at)
        handler = getattr(self, f"_on_{kind}")
        handler(data)
        return True

    def run(self) -> list[SimEvent]:
        while self.step():
            pass
        return self.events

    def finished(self) -> bool:
        return not self._heap and not self.open_requests()

    def drain_immediate(self) -> int:
        """Process operator answers/timeouts queued at the current instant.

        Leaves any other scheduled work untouched so a paused run stays
        paused while verdicts still take effect right away.
        """
        n = 0
        while self._heap:
            at, _, kind, _ = self._heap[0]
            if kind not in ("answer", "timeout") or at > self.now:
                break
            self.step()
            n += 1
        return n

    def next_work_time(self) -> float | None:
        return self._heap[0][0] if self._heap else None

    def open_requests(self) -> list[PendingRequest]:
        return [p for p in self.pending.values() if not p.terminal]

    def inject_withdrawal(self, at: float, human_id: str) -> None:
        """Schedule a consent withdrawal; the chain learns hop by hop."""
        state = self._state_for_human(human_id)
        self._schedule(max(self.now, at), "withdraw", WithdrawOp(max(self.now, at), state.ref.id))

    def schedule_answer(self, request_id: str, verdict: str, source: str = "operator") -> None:
        """Queue an operator verdict for a pending request at the current time."""
        if verdict not in (GRANT, DENY):
            raise ValueError("verdict must be 'grant' or 'deny'")
        req = self.pending.get(request_id)
        if req is None:
            raise UnknownRequest(f"no request {request_id!r}")
        if req.terminal:
            raise AlreadyAnswered(f"request {request_id!r} already resolved")
        self._schedule(self.now, "answer", (request_id, verdict, source))

    def force_timeout(self, request_id: str) -> None:
        """Resolve a pending request as an unanswered timeout, immediately."""
        self._schedule(self.now, "timeout", request_id)

    def final_state(self) -> dict:
        """Reconstructable end-of-run state, compared against log replay.

        Statuses are evaluated at the last logged event time so that a
        replay of the log lands on the identical structure.
        """
        end = self.events[-1].time if self.events else self.now
        return {
            "consents": {
                cid: {
                    "status": status_at(state.tuple_now, end).value,
                    "withdrawn_at": state.tuple_now.withdrawn_at,
                }
                for cid, state in sorted(self._consents.items())
            },
            "graphs": {
                cid: state.graph
                for cid, state in sorted(self._consents.items())
                if state.graph is not None
            },
            "decisions": list(self._decisions),
            "executed": list(self._executed),
            "blocked": dict(self._blocked),
        }

    # -- internals

    def _state_for_human(self, human_id: str) -> _ConsentState:
        for state in self._consents.values():
            if state.ref.document.human_id == human_id:
                return state
        raise UnknownHuman(f"no consent held by {human_id!r}")

    def _depth_of(self, state: _ConsentState, agent: str) -> tuple[int, bool]:
        """(depth used for severity, agent is in the delegation chain)."""
        graph = state.graph
        if graph is not None and graph.in_chain(agent):
            return effective_consent(graph, agent).depth, True
        # fail-safe: agents outside the chain score the maximum depth
        return self.spec.profile.d_max, False

    def _applied_at(self, state: _ConsentState, agent: str) -> float | None:
        """Virtual time at which the agent learns of the withdrawal."""
        issued = state.withdrawal_issued_at
        if issued is None:
            return None
        graph = state.graph
        if graph is not None and graph.in_chain(agent):
            depth = effective_consent(graph, agent).depth
            return issued + self.spec.message_latency * depth
        return issued

    def _status_for(self, state: _ConsentState, agent: str, now: float) -> str:
        applied = self._applied_at(state, agent)
        if applied is not None and now >= applied:
            return ConsentStatus.WITHDRAWN.value
        if state.tuple_now.status is ConsentStatus.EXPIRED or now > state.tuple_now.valid_until:
            return ConsentStatus.EXPIRED.value
        return ConsentStatus.ACTIVE.value

    # -- work handlers

    def _on_script(self, op: ScriptOp) -> None:
        if isinstance(op, GrantOp):
            self._do_grant(op)
        elif isinstance(op, DelegateOp):
            self._do_delegate(op)
        elif isinstance(op, RequestActionOp):
            self._do_request(op)
        elif isinstance(op, WithdrawOp):
            self._do_withdraw(op)
        elif isinstance(op, ContextChangeOp):
            self._do_context_change(op)
        else:  # pragma: no cover - loader only produces the above
            raise MalformedSpec(f"unhandled op {op!r}")

    def _do_grant(self, op: GrantOp) -> None:
        state = self._consents[op.consent_id]
        scope = materialize_scope(state.tuple_now, self.spec.bucket_width)
        state.scope = scope
        state.graph = new_graph(
            human_id=state.tuple_now.human_id,
            consent=state.tuple_now,
            root_scope=scope,
            root_agent=op.to_agent,
            granted_at=self.now,
        )
        self._emit(
            "ConsentGranted",
            {
                "consent_id": op.consent_id,
                "human_id": state.tuple_now.human_id,
                "to_agent": op.to_agent,
                "document": consent_to_obj(state.tuple_now),
                "bucket_width": self.spec.bucket_width,
                "scope_size": len(scope),
            },
        )

    def _do_delegate(self, op: DelegateOp) -> None:
        state = self._consents[op.consent_id]
        if state.graph is None:
            raise MalformedSpec(f"delegate before grant of {op.consent_id!r}")
        status = self._status_for(state, op.from_agent, self.now)
        if status == ConsentStatus.WITHDRAWN.value:
            raise WithdrawnConsent(
                f"{op.from_agent!r} cannot delegate withdrawn consent {op.consent_id!r}"
            )
        if status == ConsentStatus.EXPIRED.value:
            raise ExpiredConsent(
                f"{op.from_agent!r} cannot delegate expired consent {op.consent_id!r}"
            )
        delta = frozenset(op.context_delta | state.unattributed_context)
        state.unattributed_context.clear()
        edge = DelegationEdge(
            from_agent=op.from_agent,
            to_agent=op.to_agent,
            delegated_scope=op.delegated,
            interpreted_scope=op.interpreted,
            timestamp=self.now,
            context_delta=delta,
        )
        state.graph = record_delegation(state.graph, edge)
        stored = state.graph.edges[-1]
        try:
            creep = scope_creep_of(state.graph, op.to_agent)
        except CorveError:
            creep = None
        self._emit(
            "DelegationRecorded",
            {
                "consent_id": op.consent_id,
                "from_agent": op.from_agent,
                "to_agent": op.to_agent,
                "delegated_scope": stored.delegated_scope.to_json_obj(),
                "interpreted_scope": stored.interpreted_scope.to_json_obj(),
                "timestamp": stored.timestamp,
                "context_delta": sorted(stored.context_delta),
                "drift": stored.drift,
                "depth": effective_consent(state.graph, op.to_agent).depth,
                "scope_creep": creep,
            },
        )

    def _do_request(self, op: RequestActionOp) -> None:
        state = self._consents[op.consent_id]
        if state.graph is None:
            raise MalformedSpec(f"request before grant of {op.consent_id!r}")
        if self.spec.pause_chain_on_reconsent and any(
            not p.terminal and p.consent_id == op.consent_id for p in self.pending.values()
        ):
            self._deferred.setdefault(op.consent_id, []).append(op)
            return

        started = _time.perf_counter()
        self._emit(
            "ActionRequested",
            {
                "action_id": op.action_id,
                "consent_id": op.consent_id,
                "agent": op.agent,
                "action_class": op.action_class,
                "zone": op.zone,
                "label": op.label,
                "params": op.params,
            },
        )

        action = ActionInstance(op.action_class, op.zone, self.now, op.agent)
        status = self._status_for(state, op.agent, self.now)
        depth, in_chain_flag = self._depth_of(state, op.agent)
        scope_ok = in_scope(state.scope, action) if state.scope is not None else False
        ir = ir_score(self.spec.catalog, op.action_class)
        delta_t = max(0.0, self.now - state.graph.granted_at)
        components = normalize_components(
            ir, delta_t, depth, state.tuple_now.ambiguity, self.spec.profile
        )
        assessment = compute_gamma(components, self.spec.profile)
        self._emit(
            "AssessmentMade",
            {
                "action_id": op.action_id,
                "agent": op.agent,
                "consent_id": op.consent_id,
                "consent_status": status,
                "in_scope": scope_ok,
                "in_chain": in_chain_flag,
                "depth": depth,
                "delta_t": delta_t,
                "assessment": assessment.to_json_obj(),
            },
        )
        decision = decide(
            assessment,
            consent_active=status == ConsentStatus.ACTIVE.value,
            agent_in_chain=in_chain_flag,
            action_in_scope=scope_ok,
            lifecycle_detail=f"consent {op.consent_id} is {status}",
        )
        self._decisions.append((op.action_id, decision))
        self._emit(
            "DecisionIssued",
            {
                "action_id": op.action_id,
                "agent": op.agent,
                "decision": decision.to_json_obj(),
                "gamma": assessment.gamma_value,
            },
        )
        self.stats.add(_time.perf_counter() - started)

        if decision.outcome is Outcome.PROCEED:
            self._execute(op)
        elif decision.outcome is Outcome.HALT:
            self._block(op, cause="halt", decision=decision)
        elif decision.outcome is Outcome.RE_CONSENT:
            self._open_request(op, RE_CONSENT, decision, assessment, state)
        else:
            self._open_request(op, ACKNOWLEDGMENT, decision, assessment, state)

    def _open_request(
        self,
        op: RequestActionOp,
        kind: str,
        decision: Decision,
        assessment,
        state: _ConsentState,
    ) -> None:
        rid = reconsent_request_id(op.action_id) if kind == RE_CONSENT else ack_request_id(
            op.action_id
        )
        deadline = self.now + self.spec.reconsent_timeout
        req = PendingRequest(
            request_id=rid,
            action_id=op.action_id,
            kind=kind,
            consent_id=op.consent_id,
            agent=op.agent,
            op=op,
            decision=decision,
            issued_at=self.now,
            deadline=deadline,
        )
        self.pending[rid] = req
        chain = []
        if state.graph is not None and state.graph.in_chain(op.agent):
            for edge in chain_provenance(state.graph, op.agent):
                chain.append(
                    {
                        "from_agent": edge.from_agent,
                        "to_agent": edge.to_agent,
                        "drift": edge.drift,
                        "timestamp": edge.timestamp,
                        "context_delta": sorted(edge.context_delta),
                    }
                )
        payload = {
            "request_id": rid,
            "action_id": op.action_id,
            "kind": kind,
            "agent": op.agent,
            "action_class": op.action_class,
            "zone": op.zone,
            "label": op.label,
            "params": op.params,
            "issued_at": self.now,
            "deadline": deadline,
            "reason": decision.reason.value if decision.reason else None,
            "assessment": assessment.with_decision(decision).to_json_obj(),
            "chain": chain,
        }
        self._emit("ReConsentRequested" if kind == RE_CONSENT else "Notified", payload)

        verdict = self.oracle.answer_for(rid, kind)
        if verdict is not None:
            self._schedule(
                self.now + self.oracle.response_latency, "answer", (rid, verdict, "oracle")
            )
        if not self.oracle.interactive:
            self._schedule(deadline, "timeout", rid)

    def _on_answer(self, data: tuple[str, str, str]) -> None:
        request_id, verdict, source = data
        req = self.pending.get(request_id)
        if req is None or req.terminal:
            return
        req.terminal = True
        state = self._consents[req.consent_id]
        if req.kind == RE_CONSENT:
            self._emit(
                "ReConsentAnswered",
                {
                    "request_id": request_id,
                    "action_id": req.action_id,
                    "kind": req.kind,
                    "verdict": verdict,
                    "source": source,
                },
            )
            if verdict == GRANT:
                self._execute_if_still_valid(req, state)
            else:
                self._block(req.op, cause="denied", decision=req.decision)
        else:
            if verdict == GRANT:
                self._emit(
                    "Acknowledged",
                    {"request_id": request_id, "action_id": req.action_id, "source": source},
                )
                self._execute_if_still_valid(req, state)
            else:
                self._emit(
                    "ReConsentAnswered",
                    {
                        "request_id": request_id,
                        "action_id": req.action_id,
                        "kind": req.kind,
                        "verdict": verdict,
                        "source": source,
                    },
                )
                self._block(req.op, cause="denied", decision=req.decision)
        self._release_deferred(req.consent_id)

    def _execute_if_still_valid(self, req: PendingRequest, state: _ConsentState) -> None:
        # an explicit grant overrides the original trigger, but consent may
        # have been withdrawn or expired while the human deliberated
        status = self._status_for(state, req.agent, self.now)
        if status == ConsentStatus.ACTIVE.value:
            self._execute(req.op)
        else:
            self._block(req.op, cause=f"{status}_before_execution", decision=req.decision)

    def _on_timeout(self, request_id: str) -> None:
        req = self.pending.get(request_id)
        if req is None or req.terminal:
            return
        req.terminal = True
        self._block(req.op, cause="oracle-timeout", decision=req.decision)
        self._release_deferred(req.consent_id)

    def _release_deferred(self, consent_id: str) -> None:
        if any(not p.terminal and p.consent_id == consent_id for p in self.pending.values()):
            return
        for op in self._deferred.pop(consent_id, []):
            self._schedule(self.now, "script", op)

    def _execute(self, op: RequestActionOp) -> None:
        self._executed.append(op.action_id)
        self._emit(
            "ActionExecuted",
            {
                "action_id": op.action_id,
                "agent": op.agent,
                "action_class": op.action_class,
                "zone": op.zone,
            },
        )

    def _block(self, op: RequestActionOp, cause: str, decision: Decision) -> None:
        self._blocked[op.action_id] = cause
        self._emit(
            "ActionBlocked",
            {
                "action_id": op.action_id,
                "agent": op.agent,
                "cause": cause,
                "decision_reason": decision.reason.value if decision.reason else None,
            },
        )

    def _do_withdraw(self, op: WithdrawOp) -> None:
        self._on_withdraw(op)

    def _on_withdraw(self, op: WithdrawOp) -> None:
        state = self._consents[op.consent_id]
        state.tuple_now = withdraw(state.tuple_now, at=self.now)
        state.withdrawal_issued_at = self.now
        self._emit(
            "WithdrawalIssued",
            {"consent_id": op.consent_id, "human_id": state.tuple_now.human_id},
        )
        graph = state.graph
        if graph is None:
            return
        by_depth = sorted(
            ((effective_consent(graph, a).depth, a) for a in graph.agents()),
        )
        for depth, agent in by_depth:
            self._schedule(
                self.now + self.spec.message_latency * depth,
                "withdraw_applied",
                (op.consent_id, agent, self.now, self.spec.message_latency * depth),
            )

    def _on_withdraw_applied(self, data: tuple[str, str, float, float]) -> None:
        consent_id, agent, issued_at, latency = data
        self._emit(
            "WithdrawalApplied",
            {
                "consent_id": consent_id,
                "agent": agent,
                "issued_at": issued_at,
                "latency": latency,
            },
        )

    def _do_context_change(self, op: ContextChangeOp) -> None:
        for state in self._consents.values():
            state.unattributed_context |= op.keys

    # service-facing summary

    def state_summary(self) -> dict:
        agents = []
        for spec_agent in self.spec.agents:
            row: dict[str, Any] = {"id": spec_agent.id, "role": spec_agent.role}
            for cid, state in sorted(self._consents.items()):
                if state.graph is not None and state.graph.in_chain(spec_agent.id):
                    ec = effective_consent(state.graph, spec_agent.id)
                    row["consent_id"] = cid
                    row["depth"] = ec.depth
                    row["scope_size"] = len(ec.scope)
                    break
            row["in_chain"] = "depth" in row
            agents.append(row)
        consents = []
        edges = []
        for cid, state in sorted(self._consents.items()):
            consents.append(
                {
                    "consent_id": cid,
                    "human_id": state.ref.document.human_id,
                    "status": status_at(state.tuple_now, self.now).value
                    if state.withdrawal_issued_at is None
                    else ConsentStatus.WITHDRAWN.value,
                    "root_agent": state.graph.root_agent if state.graph else None,
                    "granted_at": state.graph.granted_at if state.graph else None,
                    "scope_size": len(state.scope) if state.scope is not None else 0,
                    "ambiguity": state.ref.document.ambiguity,
                }
            )
            if state.graph is not None:
                for e in state.graph.edges:
                    edges.append(
                        {
                            "consent_id": cid,
                            "from_agent": e.from_agent,
                            "to_agent": e.to_agent,
                            "drift": e.drift,
                            "timestamp": e.timestamp,
                            "context_delta": sorted(e.context_delta),
                        }
                    )
        return {
            "scenario": self.spec.name,
            "description": self.spec.description,
            "profile": self.spec.profile.name,
            "time": self.now,
            "agents": agents,
            "consents": consents,
            "edges": edges,
            "pending": [p.request_id for p in self.open_requests()],
            "executed": list(self._executed),
            "blocked": dict(self._blocked),
            "event_count": len(self.events),
            "latency": self.stats.summary(),
        }


def run(spec: ScenarioSpec, oracle: ConsentOracle) -> list[SimEvent]:
    """Run a scenario to completion and return its event log."""
    return Simulation(spec, oracle).run()


# ---------------------------------------------------------------- outcomes

EXPECTATIONS = ("re-consent", "halt", "notify", "proceed")


def assert_outcome(events: list[SimEvent], expectation: str) -> OutcomeReport:
    """Check an event log against a named outcome pattern.

    re-consent: at least one blocking re-consent request was raised.
    halt: at least one action ended blocked (no later execution).
    notify: a notification was raised, and any notified action that ran
    was acknowledged first.
    proceed: every requested action executed with no blocks or prompts.
    """
    if expectation not in EXPECTATIONS:
        raise ValueError(f"expectation must be one of {EXPECTATIONS}")

    requested = [e.payload["action_id"] for e in events if e.kind == "ActionRequested"]
    executed = {e.payload["action_id"]: e.seq for e in events if e.kind == "ActionExecuted"}
    blocked = {
        e.payload["action_id"]: e.payload["cause"] for e in events if e.kind == "ActionBlocked"
    }
    reconsents = [e for e in events if e.kind == "ReConsentRequested"]
    notified = [e for e in events if e.kind == "Notified"]
    acks = {e.payload["action_id"]: e.seq for e in events if e.kind == "Acknowledged"}

    details: list[str] = []
    if expectation == "re-consent":
        passed = len(reconsents) > 0
        for e in reconsents:
            details.append(
                f"re-consent requested for {e.payload['action_id']} "
                f"(reason {e.payload['reason']})"
            )
        if not passed:
            details.append("no re-consent request found")
    elif expectation == "halt":
        halted = {a: c for a, c in blocked.items() if a not in executed}
        passed = len(halted) > 0
        for action_id, cause in sorted(halted.items()):
            details.append(f"action {action_id} blocked ({cause})")
        if not passed:
            details.append("no permanently blocked action found")
    elif expectation == "notify":
        passed = len(notified) > 0
        for e in notified:
            details.append(f"notification raised for {e.payload['action_id']}")
        for e in notified:
            action_id = e.payload["action_id"]
            if action_id in executed:
                if action_id not in acks or acks[action_id] > executed[action_id]:
                    passed = False
                    details.append(f"action {action_id} executed without acknowledgment")
                else:
                    details.append(f"action {action_id} acknowledged then executed")
        if not notified:
            details.append("no notification found")
    else:
        missing = [a for a in requested if a not in executed]
        passed = not missing and not blocked and not reconsents and not notified
        if missing:
            details.append(f"actions never executed: {missing}")
        if blocked:
            details.append(f"blocked actions: {sorted(blocked)}")
        if reconsents or notified:
            details.append("human interaction was required")
        if passed:
            details.append(f"all {len(requested)} actions executed")
    return OutcomeReport(expectation=expectation, passed=passed, details=tuple(details))
