"""Append-only persistence and replay of simulation event logs.

Segment format (.ccdlog): one JSON event per line, closed by a final line
{"checksum": "<sha256>"} over every preceding byte. Closed segments are
immutable; readers verify the checksum before trusting the content.
Replaying a log rebuilds provenance graphs, consent statuses, and the
decision record, and must land on the exact state the live run reported.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

from .consent import ScopeSet, consent_from_obj, materialize_scope, status_at, withdraw
from .delegation import (
    DelegationEdge,
    ProvenanceGraph,
    effective_consent,
    new_graph,
    record_delegation,
    scope_creep_of,
)
from .errors import ChecksumMismatch, OutOfOrderEvent, StorageFailure
from .policy import Decision
from .simulator import SimEvent

CHECKSUM_KEY = "checksum"
SEGMENT_SUFFIX = ".ccdlog"


@dataclass
class LogSegment:
    """An open, append-only event segment, optionally file-backed."""

    path: str | None = None
    events: list[SimEvent] = field(default_factory=list)
    closed: bool = False
    _hasher: "hashlib._Hash" = field(default_factory=hashlib.sha256, repr=False)
    _last: tuple[float, int] = (-math.inf, -1)

    def __post_init__(self) -> None:
        if self.path is not None:
            if os.path.exists(self.path) and os.path.getsize(self.path) > 0:
                raise StorageFailure(
                    f"segment {self.path!r} already exists and is not empty"
                )
            with open(self.path, "wb"):
                pass

    def append(self, event: SimEvent) -> None:
        """Append one event; events must arrive in (time, seq) order."""
        if self.closed:
            raise StorageFailure("segment is closed")
        key = (event.time, event.seq)
        if key <= self._last:
            raise OutOfOrderEvent(
                f"event at {key} not after {self._last} (append-only order)"
            )
        line = (event.to_json_line() + "\n").encode("utf-8")
        if self.path is not None:
            try:
                with open(self.path, "ab") as fh:
                    fh.write(line)
            except OSError as exc:
                raise StorageFailure(f"cannot append to {self.path!r}: {exc}") from exc
        self._hasher.update(line)
        self.events.append(event)
        self._last = key

    def close(self) -> str:
        """Write the checksum trailer; the segment becomes immutable."""
        if self.closed:
            raise StorageFailure("segment is already closed")
        digest = self._hasher.hexdigest()
        trailer = json.dumps({CHECKSUM_KEY: digest}, separators=(",", ":")) + "\n"
        if self.path is not None:
            try:
                with open(self.path, "ab") as fh:
                    fh.write(trailer.encode("utf-8"))
            except OSError as exc:
                raise StorageFailure(f"cannot close {self.path!r}: {exc}") from exc
        self.closed = True
        return digest

    def to_bytes(self) -> bytes:
        """Serialized segment including trailer, for in-memory segments."""
        body = b"".join((e.to_json_line() + "\n").encode("utf-8") for e in self.events)
        digest = hashlib.sha256(body).hexdigest()
        trailer = json.dumps({CHECKSUM_KEY: digest}, separators=(",", ":")) + "\n"
        return body + trailer.encode("utf-8")


def write_log(events: list[SimEvent], path: str) -> str:
    """Persist a complete event log as a closed segment; returns checksum."""
    segment = LogSegment(path=path)
    for event in events:
        segment.append(event)
    return segment.close()


def read_log(path: str) -> list[SimEvent]:
    """Load and verify a closed segment.

    Raises ChecksumMismatch for truncated or altered files and
    StorageFailure for lines that do not parse.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise StorageFailure(f"cannot read {path!r}: {exc}") from exc
    lines = data.splitlines(keepends=True)
    if not lines:
        raise ChecksumMismatch(f"{path!r} is empty; a closed segment has a trailer")
    trailer_raw = lines[-1]
    try:
        trailer = json.loads(trailer_raw)
    except json.JSONDecodeError as exc:
        raise ChecksumMismatch(f"{path!r} has no checksum trailer: {exc}") from exc
    if not isinstance(trailer, dict) or set(trailer.keys()) != {CHECKSUM_KEY}:
        raise ChecksumMismatch(f"{path!r} last line is not a checksum trailer")
    body = b"".join(lines[:-1])
    digest = hashlib.sha256(body).hexdigest()
    if digest != trailer[CHECKSUM_KEY]:
        raise ChecksumMismatch(
            f"{path!r} checksum mismatch: stored {trailer[CHECKSUM_KEY][:12]}..., "
            f"computed {digest[:12]}..."
        )
    events = []
    for i, raw in enumerate(lines[:-1]):
        try:
            obj = json.loads(raw)
            events.append(SimEvent.from_json_obj(obj))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise StorageFailure(f"{path!r} line {i + 1} is not an event: {exc}") from exc
    return events


def replay(events: list[SimEvent]) -> dict:
    """Rebuild final state from a log.

    Returns the same structure as the live engine's final_state: consent
    statuses, provenance graphs, the (action, decision) record, executed
    actions, and blocked actions with causes.
    """
    tuples: dict[str, object] = {}
    graphs: dict[str, ProvenanceGraph] = {}
    decisions: list[tuple[str, Decision]] = []
    executed: list[str] = []
    blocked: dict[str, str] = {}

    for event in events:
        payload = event.payload
        if event.kind == "ConsentGranted":
            cid = payload["consent_id"]
            tup = consent_from_obj(payload["document"])
            scope = materialize_scope(tup, payload["bucket_width"])
            tuples[cid] = tup
            graphs[cid] = new_graph(
                human_id=payload["human_id"],
                consent=tup,
                root_scope=scope,
                root_agent=payload["to_agent"],
                granted_at=event.time,
            )
        elif event.kind == "DelegationRecorded":
            cid = payload["consent_id"]
            edge = DelegationEdge(
                from_agent=payload["from_agent"],
                to_agent=payload["to_agent"],
                delegated_scope=ScopeSet.from_json_obj(payload["delegated_scope"]),
                interpreted_scope=ScopeSet.from_json_obj(payload["interpreted_scope"]),
                timestamp=payload["timestamp"],
                context_delta=frozenset(payload["context_delta"]),
            )
            graphs[cid] = record_delegation(graphs[cid], edge)
            stored = graphs[cid].edges[-1]
            if abs(stored.drift - payload["drift"]) > 1e-12:
                raise StorageFailure(
                    f"drift mismatch on replayed edge "
                    f"{payload['from_agent']}->{payload['to_agent']}"
                )
        elif event.kind == "WithdrawalIssued":
            cid = payload["consent_id"]
            tuples[cid] = withdraw(tuples[cid], at=event.time)
        elif event.kind == "DecisionIssued":
            decisions.append(
                (payload["action_id"], Decision.from_json_obj(payload["decision"]))
            )
        elif event.kind == "ActionExecuted":
            executed.append(payload["action_id"])
        elif event.kind == "ActionBlocked":
            blocked[payload["action_id"]] = payload["cause"]

    end = events[-1].time if events else 0.0
    return {
        "consents": {
            cid: {
                "status": status_at(tup, end).value,
                "withdrawn_at": tup.withdrawn_at,
            }
            for cid, tup in sorted(tuples.items())
        },
        "graphs": dict(sorted(graphs.items())),
        "decisions": decisions,
        "executed": executed,
        "blocked": blocked,
    }


def replay_file(path: str) -> dict:
    return replay(read_log(path))


def graph_to_json_obj(graph: ProvenanceGraph) -> dict:
    """JSON projection of a provenance graph with per-agent depth and creep."""
    agents = []
    for agent in sorted(graph.agents()):
        ec = effective_consent(graph, agent)
        agents.append(
            {
                "agent": agent,
                "depth": ec.depth,
                "granted_at": ec.granted_at,
                "scope_creep": scope_creep_of(graph, agent),
            }
        )
    return {
        "human_id": graph.human_id,
        "root_agent": graph.root_agent,
        "granted_at": graph.granted_at,
        "agents": agents,
        "edges": [edge.to_json_obj() for edge in graph.edges],
    }


def state_to_json_obj(state: dict) -> dict:
    """JSON projection of final_state/replay output."""
    return {
        "consents": state["consents"],
        "graphs": {cid: graph_to_json_obj(g) for cid, g in state["graphs"].items()},
        "decisions": [
            {"action_id": aid, "decision": decision.to_json_obj()}
            for aid, decision in state["decisions"]
        ],
        "executed": state["executed"],
        "blocked": state["blocked"],
    }
