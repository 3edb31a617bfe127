"""Provenance graph, effective consent, drift, and scope creep."""

from __future__ import annotations

import json
import random

import pytest

from corve.consent import ConsentTuple, ScopeSet, materialize_scope
from corve.delegation import (
    DelegationEdge,
    ProvenanceGraph,
    chain_provenance,
    compute_drift,
    effective_consent,
    export_provenance_jsonl,
    new_graph,
    record_delegation,
    scope_creep,
    scope_creep_of,
)
from corve.errors import (
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

WIDTH = 10.0


def triples(*indices: int) -> ScopeSet:
    """Small scope set over a universe of (a{i}, z, 0) triples."""
    return ScopeSet(frozenset((f"a{i}", "z", 0) for i in indices), WIDTH)


def graph_with_root(delegable: bool = True, scope: ScopeSet | None = None) -> ProvenanceGraph:
    scope = scope or triples(0, 1, 2, 3)
    consent = ConsentTuple(
        human_id="H",
        action_types=frozenset(t[0] for t in scope.triples),
        spatial_scope=frozenset({"z"}),
        valid_from=0.0,
        valid_until=100.0,
        delegable=delegable,
    )
    return new_graph("H", consent, scope, "R_N", granted_at=0.0)


def edge(
    frm: str,
    to: str,
    delegated: ScopeSet,
    interpreted: ScopeSet | None = None,
    ts: float = 1.0,
    ctx: frozenset[str] = frozenset(),
) -> DelegationEdge:
    return DelegationEdge(frm, to, delegated, interpreted or delegated, ts, ctx)


class TestDrift:
    def test_identical_sets(self):
        assert compute_drift(triples(0, 1), triples(0, 1)) == 0.0

    def test_disjoint_sets(self):
        assert compute_drift(triples(0, 1), triples(2, 3)) == 1.0

    def test_partial_overlap(self):
        # union 6, intersection 2
        delegated = triples(0, 1, 2, 3)
        interpreted = triples(2, 3, 4, 5)
        assert compute_drift(delegated, interpreted) == pytest.approx(1 - 2 / 6, abs=1e-12)

    def test_both_empty(self):
        with pytest.raises(BothEmpty):
            compute_drift(triples(), triples())

    def test_symmetry_and_bounds(self):
        rng = random.Random(3)
        universe = list(range(8))
        for _ in range(300):
            a = triples(*rng.sample(universe, rng.randint(0, 8)))
            b = triples(*rng.sample(universe, rng.randint(0, 8)))
            if len(a) == 0 and len(b) == 0:
                continue
            d = compute_drift(a, b)
            assert 0.0 <= d <= 1.0
            assert d == compute_drift(b, a)


class TestRecord:
    def test_delegation_forbidden_by_default_deny(self):
        g = graph_with_root(delegable=False)
        with pytest.raises(DelegationForbidden):
            record_delegation(g, edge("R_N", "R_P", triples(0)))

    def test_chain_depths(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1)))
        g = record_delegation(g, edge("R_P", "R_B", triples(0), ts=2.0))
        assert len(g.edges) == 2
        assert effective_consent(g, "R_N").depth == 1
        assert effective_consent(g, "R_P").depth == 2
        assert effective_consent(g, "R_B").depth == 3

    def test_self_delegation(self):
        with pytest.raises(CycleDetected):
            edge("R_N", "R_N", triples(0))

    def test_delegating_back_to_ancestor(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1)))
        with pytest.raises(CycleDetected):
            record_delegation(g, edge("R_P", "R_N", triples(0), ts=2.0))

    def test_unknown_delegator(self):
        g = graph_with_root()
        with pytest.raises(UnknownDelegator):
            record_delegation(g, edge("R_X", "R_P", triples(0)))

    def test_second_inbound_edge_rejected(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1)))
        g = record_delegation(g, edge("R_N", "R_Q", triples(2), ts=2.0))
        with pytest.raises(DuplicateGrant):
            record_delegation(g, edge("R_Q", "R_P", triples(2), ts=3.0))

    def test_empty_delegated_scope(self):
        g = graph_with_root()
        with pytest.raises(EmptyDelegatedScope):
            record_delegation(g, edge("R_N", "R_P", triples()))

    def test_delegating_beyond_own_scope(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1)))
        with pytest.raises(DelegationExceedsScope):
            record_delegation(g, edge("R_P", "R_B", triples(2), ts=2.0))

    def test_append_only(self):
        g0 = graph_with_root()
        g1 = record_delegation(g0, edge("R_N", "R_P", triples(0)))
        assert g0.edges == ()
        assert g1.edges[:0] == ()
        g2 = record_delegation(g1, edge("R_P", "R_B", triples(0), ts=2.0))
        assert g2.edges[:1] == g1.edges

    def test_drift_cached_matches_recompute(self):
        g = graph_with_root()
        g = record_delegation(
            g, edge("R_N", "R_P", triples(0, 1), interpreted=triples(1, 2))
        )
        e = g.edges[0]
        assert e.drift == pytest.approx(
            compute_drift(e.delegated_scope, e.interpreted_scope), abs=1e-12
        )

    def test_replaying_edges_reconstructs_graph(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1), interpreted=triples(1, 2)))
        g = record_delegation(g, edge("R_P", "R_B", triples(1), ts=2.0))
        rebuilt = graph_with_root()
        for e in g.edges:
            rebuilt = record_delegation(rebuilt, e)
        assert rebuilt == g


class TestEffectiveConsent:
    def test_root_agent(self):
        g = graph_with_root()
        ec = effective_consent(g, "R_N")
        assert ec.scope == g.root_scope
        assert ec.depth == 1
        assert ec.granted_at == 0.0

    def test_interpretation_wins_over_intent(self):
        g = graph_with_root()
        drifted = triples(0, 1, 9)
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1), interpreted=drifted))
        assert effective_consent(g, "R_P").scope == drifted

    def test_identity_chain_stays_inside_root(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1)))
        g = record_delegation(g, edge("R_P", "R_B", triples(0), ts=2.0))
        for agent in ("R_N", "R_P", "R_B"):
            assert effective_consent(g, agent).scope.issubset(g.root_scope)

    def test_unknown_agent(self):
        g = graph_with_root()
        with pytest.raises(UnknownAgent):
            effective_consent(g, "R_X")


class TestChainProvenance:
    def test_root_is_empty(self):
        assert chain_provenance(graph_with_root(), "R_N") == []

    def test_two_hop_chain(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1)))
        g = record_delegation(g, edge("R_P", "R_B", triples(0), ts=2.0))
        chain = chain_provenance(g, "R_B")
        assert [(e.from_agent, e.to_agent) for e in chain] == [
            ("R_N", "R_P"),
            ("R_P", "R_B"),
        ]

    def test_unknown_agent(self):
        with pytest.raises(UnknownAgent):
            chain_provenance(graph_with_root(), "R_X")


class TestScopeCreep:
    def test_subset_is_zero(self):
        assert scope_creep(triples(0, 1), triples(0, 1, 2)) == 0.0

    def test_disjoint_is_one(self):
        assert scope_creep(triples(4, 5), triples(0, 1)) == 1.0

    def test_half(self):
        assert scope_creep(triples(0, 1, 4, 5), triples(0, 1)) == 0.5

    def test_empty_effective(self):
        with pytest.raises(EmptyEffectiveScope):
            scope_creep(triples(), triples(0))

    def test_matches_brute_force(self):
        rng = random.Random(5)
        universe = list(range(10))
        for _ in range(500):
            eff = triples(*rng.sample(universe, rng.randint(1, 10)))
            orig = triples(*rng.sample(universe, rng.randint(0, 10)))
            got = scope_creep(eff, orig)
            inter = len({t for t in eff.triples if t in orig.triples})
            assert got == pytest.approx(1 - inter / len(eff.triples), abs=1e-15)
            assert 0.0 <= got <= 1.0
            assert (got == 0.0) == eff.issubset(orig)

    def test_zero_iff_subset_exact(self):
        assert scope_creep(triples(0), triples(0)) == 0.0

    def test_identity_chain_has_zero_creep_at_every_depth(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1)))
        g = record_delegation(g, edge("R_P", "R_B", triples(1), ts=2.0))
        for agent in ("R_N", "R_P", "R_B"):
            assert scope_creep_of(g, agent) == 0.0

    def test_drifted_chain_creeps(self):
        g = graph_with_root()
        g = record_delegation(
            g, edge("R_N", "R_P", triples(0, 1), interpreted=triples(0, 9))
        )
        assert scope_creep_of(g, "R_P") == 0.5


class TestExport:
    def test_jsonl_deterministic(self):
        g = graph_with_root()
        g = record_delegation(
            g,
            edge("R_N", "R_P", triples(0, 1), ctx=frozenset({"lighting", "occupancy"})),
        )
        out1 = export_provenance_jsonl(g)
        out2 = export_provenance_jsonl(g)
        assert out1 == out2
        line = json.loads(out1.splitlines()[0])
        assert list(line.keys()) == [
            "from_agent",
            "to_agent",
            "delegated_scope",
            "interpreted_scope",
            "timestamp",
            "context_delta",
            "drift",
        ]
        assert line["context_delta"] == ["lighting", "occupancy"]

    def test_edge_round_trip(self):
        g = graph_with_root()
        g = record_delegation(g, edge("R_N", "R_P", triples(0, 1), interpreted=triples(1)))
        e = g.edges[0]
        assert DelegationEdge.from_json_obj(e.to_json_obj()) == e

    def test_empty_graph_exports_empty(self):
        assert export_provenance_jsonl(graph_with_root()) == ""


def test_materialized_consent_feeds_graph():
    consent = ConsentTuple(
        human_id="P",
        action_types=frozenset({"daily_care"}),
        spatial_scope=frozenset({"room"}),
        valid_from=0.0,
        valid_until=28799.0,
        delegable=True,
        ambiguity=0.3,
    )
    scope = materialize_scope(consent, 3600.0)
    assert len(scope) == 8
    g = new_graph("P", consent, scope, "R_N", granted_at=0.0)
    sub = ScopeSet(frozenset(list(scope.triples)[:4]), 3600.0)
    g = record_delegation(g, DelegationEdge("R_N", "R_P", sub, sub, 5.0))
    assert effective_consent(g, "R_P").depth == 2
