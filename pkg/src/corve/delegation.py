"""Delegation chain tracking: provenance graph, effective consent, drift.

The graph records every delegation as an immutable edge holding both what
the delegator intended to hand over (a subset of its own effective scope)
and what the receiver took it to mean. The receiver's interpretation is
deliberately NOT constrained to the delegator's intent: interpretation
drift is the failure mode this layer exists to measure. Scope creep
compares any agent's effective scope against the original grant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .consent import ConsentTuple, ScopeSet
from .errors import (
    BothEmpty,
    CycleDetected,
    DelegationExceedsScope,
    DelegationForbidden,
    DuplicateGrant,
    EmptyDelegatedScope,
    EmptyEffectiveScope,
    UnknownAgent,
    UnknownDelegator,
)


@dataclass(frozen=True, slots=True)
class DelegationEdge:
    """One delegation event.

    delegated_scope is the subset the delegator intends to hand over;
    interpreted_scope is the receiver's reading of it, possibly drifted.
    context_delta lists ambient context keys that changed since the grant.
    drift is cached by record_delegation; edges under construction may
    leave it None.
    """

    from_agent: str
    to_agent: str
    delegated_scope: ScopeSet
    interpreted_scope: ScopeSet
    timestamp: float
    context_delta: frozenset[str] = frozenset()
    drift: float | None = None

    def __post_init__(self) -> None:
        if self.from_agent == self.to_agent:
            raise CycleDetected(f"agent {self.from_agent!r} cannot delegate to itself")

    def to_json_obj(self) -> dict:
        return {
            "from_agent": self.from_agent,
            "to_agent": self.to_agent,
            "delegated_scope": self.delegated_scope.to_json_obj(),
            "interpreted_scope": self.interpreted_scope.to_json_obj(),
            "timestamp": self.timestamp,
            "context_delta": sorted(self.context_delta),
            "drift": self.drift,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> DelegationEdge:
        return cls(
            from_agent=obj["from_agent"],
            to_agent=obj["to_agent"],
            delegated_scope=ScopeSet.from_json_obj(obj["delegated_scope"]),
            interpreted_scope=ScopeSet.from_json_obj(obj["interpreted_scope"]),
            timestamp=obj["timestamp"],
            context_delta=frozenset(obj["context_delta"]),
            drift=obj["drift"],
        )


@dataclass(frozen=True, slots=True)
class EffectiveConsent:
    """What one agent is actually operating under."""

    agent: str
    scope: ScopeSet
    depth: int
    granted_at: float


@dataclass(frozen=True, slots=True)
class ProvenanceGraph:
    """Append-only forest of delegations under one root consent grant.

    The human's grant to root_agent counts as delegation step 1, so the
    root agent has depth 1 and each edge adds 1.
    """

    human_id: str
    root_consent: ConsentTuple
    root_scope: ScopeSet
    root_agent: str
    granted_at: float
    edges: tuple[DelegationEdge, ...] = field(default_factory=tuple)

    def agents(self) -> frozenset[str]:
        return frozenset({self.root_agent} | {e.to_agent for e in self.edges})

    def in_chain(self, agent: str) -> bool:
        return agent in self.agents()

    def inbound_edge(self, agent: str) -> DelegationEdge | None:
        for edge in self.edges:
            if edge.to_agent == agent:
                return edge
        return None


def new_graph(
    human_id: str,
    consent: ConsentTuple,
    root_scope: ScopeSet,
    root_agent: str,
    granted_at: float,
) -> ProvenanceGraph:
    return ProvenanceGraph(
        human_id=human_id,
        root_consent=consent,
        root_scope=root_scope,
        root_agent=root_agent,
        granted_at=granted_at,
    )


def compute_drift(delegated: ScopeSet, interpreted: ScopeSet) -> float:
    """Jaccard distance between intent and interpretation.

    1 - |delegated ∩ interpreted| / |delegated ∪ interpreted|; symmetric
    and bounded in [0, 1]. Undefined when both sets are empty.
    """
    union = delegated.union(interpreted)
    if len(union) == 0:
        raise BothEmpty("drift is undefined for two empty scope sets")
    inter = delegated.intersection(interpreted)
    return 1.0 - len(inter) / len(union)


def record_delegation(graph: ProvenanceGraph, edge: DelegationEdge) -> ProvenanceGraph:
    """Append one delegation; returns a new graph, the input is unchanged.

    The delegator must already hold effective consent and may only hand
    over a subset of it; the receiver must not already hold consent in
    this graph (forest shape) nor be an ancestor of the delegator.
    Drift is recomputed and stored on the appended edge.
    """
    if not graph.root_consent.delegable:
        raise DelegationForbidden(
            f"consent of {graph.human_id!r} does not permit delegation"
        )
    if not graph.in_chain(edge.from_agent):
        raise UnknownDelegator(f"agent {edge.from_agent!r} holds no consent")
    ancestors = {edge.from_agent}
    for e in chain_provenance(graph, edge.from_agent):
        ancestors.add(e.from_agent)
    ancestors.add(graph.root_agent)
    if edge.to_agent in ancestors:
        raise CycleDetected(
            f"delegation {edge.from_agent!r} -> {edge.to_agent!r} closes a cycle"
        )
    if graph.in_chain(edge.to_agent):
        raise DuplicateGrant(f"agent {edge.to_agent!r} already holds consent")
    if len(edge.delegated_scope) == 0:
        raise EmptyDelegatedScope("delegated scope is empty")
    parent_scope = effective_consent(graph, edge.from_agent).scope
    if not edge.delegated_scope.issubset(parent_scope):
        raise DelegationExceedsScope(
            f"{edge.from_agent!r} delegates triples outside its effective scope"
        )
    drift = compute_drift(edge.delegated_scope, edge.interpreted_scope)
    stored = replace(edge, drift=drift)
    return replace(graph, edges=graph.edges + (stored,))


def effective_consent(graph: ProvenanceGraph, agent: str) -> EffectiveConsent:
    """Scope, depth, and grant time the agent currently operates under.

    The root agent operates under the original scope at depth 1; every
    other agent operates under the interpreted scope of its inbound edge.
    """
    if agent == graph.root_agent:
        return EffectiveConsent(agent, graph.root_scope, 1, graph.granted_at)
    chain = chain_provenance(graph, agent)
    return EffectiveConsent(
        agent=agent,
        scope=chain[-1].interpreted_scope,
        depth=1 + len(chain),
        granted_at=graph.granted_at,
    )


def chain_provenance(graph: ProvenanceGraph, agent: str) -> list[DelegationEdge]:
    """Edges from the root to the agent, in delegation order."""
    if agent == graph.root_agent:
        return []
    chain: list[DelegationEdge] = []
    current = agent
    while current != graph.root_agent:
        edge = graph.inbound_edge(current)
        if edge is None:
            raise UnknownAgent(f"agent {agent!r} is not in the delegation graph")
        chain.append(edge)
        current = edge.from_agent
    chain.reverse()
    return chain


def scope_creep(effective: ScopeSet, original: ScopeSet) -> float:
    """Fraction of the effective scope not covered by the original grant.

    1 - |effective ∩ original| / |effective|. Zero iff effective is a
    subset of the original; 1 when they are disjoint. Undefined on an
    empty effective scope.
    """
    if len(effective) == 0:
        raise EmptyEffectiveScope("scope creep is undefined for an empty scope")
    inter = effective.intersection(original)
    return 1.0 - len(inter) / len(effective)


def scope_creep_of(graph: ProvenanceGraph, agent: str) -> float:
    return scope_creep(effective_consent(graph, agent).scope, graph.root_scope)


def export_provenance_jsonl(graph: ProvenanceGraph) -> str:
    """One edge per line, deterministic field order; golden-file comparable."""
    lines = [json.dumps(e.to_json_obj(), separators=(",", ":")) for e in graph.edges]
    return "\n".join(lines) + ("\n" if lines else "")
