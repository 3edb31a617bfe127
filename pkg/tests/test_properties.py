"""Property-based invariants across the scope algebra and serialization."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corve.consent import (
    ScopeSet,
    consent_from_obj,
    consent_to_obj,
    parse_consent_document,
)
from corve.delegation import compute_drift
from corve.errors import BothEmpty

WIDTH = 60.0

triples = st.tuples(
    st.sampled_from(["lift", "clean", "carry"]),
    st.sampled_from(["z1", "z2"]),
    st.integers(min_value=0, max_value=5),
)
triple_sets = st.frozensets(triples, max_size=20)


def scope(t: frozenset) -> ScopeSet:
    return ScopeSet(t, WIDTH)


class TestScopeAlgebra:
    @given(triple_sets, triple_sets)
    def test_matches_set_semantics(self, a, b):
        assert scope(a).intersection(scope(b)).triples == a & b
        assert scope(a).union(scope(b)).triples == a | b
        assert scope(a).issubset(scope(b)) == (a <= b)

    @given(triple_sets, triple_sets, triple_sets)
    def test_intersection_associative(self, a, b, c):
        left = scope(a).intersection(scope(b)).intersection(scope(c))
        right = scope(a).intersection(scope(b).intersection(scope(c)))
        assert left.triples == right.triples

    @given(triple_sets)
    def test_sorted_triples_stable(self, a):
        assert scope(a).sorted_triples() == sorted(a)
        assert ScopeSet.from_json_obj(scope(a).to_json_obj()).triples == a


class TestDrift:
    @given(triple_sets, triple_sets)
    def test_bounded_and_symmetric(self, a, b):
        if not a and not b:
            with pytest.raises(BothEmpty):
                compute_drift(scope(a), scope(b))
            return
        d = compute_drift(scope(a), scope(b))
        assert 0.0 <= d <= 1.0
        assert d == compute_drift(scope(b), scope(a))

    @given(triple_sets.filter(bool))
    def test_identity(self, a):
        assert compute_drift(scope(a), scope(a)) == 0.0

    @given(triple_sets.filter(bool), triple_sets.filter(bool))
    def test_disjoint_is_total_drift(self, a, b):
        if a & b:
            return
        assert compute_drift(scope(a), scope(b)) == 1.0


consent_docs = st.fixed_dictionaries(
    {
        "version": st.just(1),
        "human_id": st.text(
            alphabet=st.characters(whitelist_categories=["Ll", "Lu", "Nd"]),
            min_size=1,
            max_size=8,
        ),
        "action_types": st.lists(
            st.sampled_from(["lift", "clean", "carry", "fetch"]),
            min_size=1,
            max_size=3,
            unique=True,
        ),
        "spatial_scope": st.lists(
            st.sampled_from(["z1", "z2", "z3"]), min_size=1, max_size=3, unique=True
        ),
        "validity": st.tuples(
            st.floats(min_value=0, max_value=1e6, allow_nan=False),
            st.floats(min_value=0, max_value=1e6, allow_nan=False),
        ).map(lambda se: {"start": min(se), "end": max(se) + 1.0}),
        "ambiguity": st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        "delegable": st.booleans(),
    }
)


class TestConsentRoundTrip:
    @settings(max_examples=200)
    @given(consent_docs)
    def test_parse_serialize_parse(self, doc):
        tup = parse_consent_document(json.dumps(doc))
        again = consent_from_obj(consent_to_obj(tup))
        assert again == tup

    @settings(max_examples=200)
    @given(consent_docs)
    def test_serialized_form_is_canonical(self, doc):
        tup = parse_consent_document(json.dumps(doc))
        obj = consent_to_obj(tup)
        assert obj == consent_to_obj(consent_from_obj(obj))
        assert obj["action_types"] == sorted(obj["action_types"])
        assert obj["spatial_scope"] == sorted(obj["spatial_scope"])
