"""Consent record parsing, scope materialization, and withdrawal."""

from __future__ import annotations

import json
import math

import pytest

from corve.consent import (
    ActionInstance,
    ConsentStatus,
    ConsentTuple,
    ExclusionRule,
    ScopeSet,
    ambiguity_of,
    bucket_of,
    consent_to_obj,
    estimate_ambiguity,
    in_scope,
    materialize_scope,
    parse_consent_document,
    status_at,
    withdraw,
)
from corve.errors import (
    AlreadyWithdrawn,
    BucketWidthMismatch,
    ExpiredConsent,
    InvalidInterval,
    MalformedDocument,
    SchemaViolation,
    WithdrawnConsent,
)


def scope_oracle(
    action_types: set[str],
    zones: set[str],
    t_start: float,
    t_end: float,
    exclusions: list[tuple[str, str | None]],
    width: float,
) -> set[tuple[str, str, int]]:
    """Independent brute-force enumeration of the authorized triples."""
    first = math.floor(t_start / width)
    last = math.floor(t_end / width)
    out = set()
    for a in action_types:
        for z in zones:
            excluded = any(
                a == ex_a and (ex_z is None or ex_z == z) for ex_a, ex_z in exclusions
            )
            if excluded:
                continue
            for b in range(first, last + 1):
                out.add((a, z, b))
    return out


def make_consent(**overrides) -> ConsentTuple:
    base = dict(
        human_id="H",
        action_types=frozenset({"a"}),
        spatial_scope=frozenset({"z"}),
        valid_from=0.0,
        valid_until=100.0,
    )
    base.update(overrides)
    return ConsentTuple(**base)


def valid_doc(**overrides) -> dict:
    doc = {
        "version": 1,
        "human_id": "H",
        "action_types": ["a", "b"],
        "spatial_scope": ["z1"],
        "validity": {"start": 0, "end": 100},
        "ambiguity": 0.3,
    }
    doc.update(overrides)
    return doc


class TestParse:
    def test_delegable_defaults_false(self):
        tup = parse_consent_document(json.dumps(valid_doc()))
        assert tup.delegable is False
        assert tup.status is ConsentStatus.ACTIVE

    def test_inverted_interval_rejected(self):
        doc = valid_doc(validity={"start": 10, "end": 5})
        with pytest.raises(InvalidInterval):
            parse_consent_document(json.dumps(doc))

    def test_scenario1_ambiguity_preserved(self):
        doc = valid_doc(action_types=["daily_care"], ambiguity=0.3)
        tup = parse_consent_document(json.dumps(doc))
        assert ambiguity_of(tup) == 0.3

    def test_not_json(self):
        with pytest.raises(MalformedDocument):
            parse_consent_document(b"{nope")

    def test_root_not_object(self):
        with pytest.raises(MalformedDocument):
            parse_consent_document(b"[1, 2]")

    def test_missing_field(self):
        doc = valid_doc()
        del doc["human_id"]
        with pytest.raises(SchemaViolation):
            parse_consent_document(json.dumps(doc))

    def test_unknown_field_rejected(self):
        doc = valid_doc(extra_grant="everything")
        with pytest.raises(SchemaViolation):
            parse_consent_document(json.dumps(doc))

    def test_wrong_version(self):
        doc = valid_doc(version=2)
        with pytest.raises(SchemaViolation):
            parse_consent_document(json.dumps(doc))

    @pytest.mark.parametrize("value", [-0.1, 1.5])
    def test_ambiguity_out_of_range(self, value):
        doc = valid_doc(ambiguity=value)
        with pytest.raises(SchemaViolation):
            parse_consent_document(json.dumps(doc))

    def test_exclusions_parsed(self):
        doc = valid_doc(exclusions=[{"action_class": "b", "zone": "z1"}, {"action_class": "a"}])
        tup = parse_consent_document(json.dumps(doc))
        assert ExclusionRule("b", "z1") in tup.exclusions
        assert ExclusionRule("a", None) in tup.exclusions

    def test_bad_exclusion_rejected(self):
        doc = valid_doc(exclusions=[{"zone": "z1"}])
        with pytest.raises(SchemaViolation):
            parse_consent_document(json.dumps(doc))

    def test_delegable_type_checked(self):
        doc = valid_doc(delegable="yes")
        with pytest.raises(SchemaViolation):
            parse_consent_document(json.dumps(doc))

    def test_round_trip_through_obj(self):
        doc = valid_doc(delegable=True, exclusions=[{"action_class": "b"}])
        tup = parse_consent_document(json.dumps(doc))
        again = parse_consent_document(json.dumps(consent_to_obj(tup)))
        assert again == tup


class TestMaterialize:
    def test_two_buckets(self):
        # window [0, 19] at width 10 covers buckets 0 and 1
        tup = make_consent(valid_until=19.0)
        scope = materialize_scope(tup, 10.0)
        assert len(scope) == 2
        assert scope.triples == {("a", "z", 0), ("a", "z", 1)}

    def test_exclusion_removes_class(self):
        tup = make_consent(
            action_types=frozenset({"a", "b"}),
            exclusions=(ExclusionRule("b"),),
            valid_until=9.0,
        )
        scope = materialize_scope(tup, 10.0)
        assert all(t[0] == "a" for t in scope.triples)

    def test_twelve_minus_three(self):
        # 2 classes x 2 zones x 3 buckets = 12 triples, exclusion (b, z2)
        # strips one class-zone column of 3.
        tup = make_consent(
            action_types=frozenset({"a", "b"}),
            spatial_scope=frozenset({"z1", "z2"}),
            valid_from=0.0,
            valid_until=29.0,
            exclusions=(ExclusionRule("b", "z2"),),
        )
        scope = materialize_scope(tup, 10.0)
        expected = scope_oracle({"a", "b"}, {"z1", "z2"}, 0.0, 29.0, [("b", "z2")], 10.0)
        assert len(expected) == 9
        assert scope.triples == frozenset(expected)

    def test_matches_oracle_on_varied_inputs(self):
        import random

        rng = random.Random(7)
        classes = ["a", "b", "c", "d"]
        zones = ["z1", "z2", "z3"]
        for _ in range(200):
            acts = set(rng.sample(classes, rng.randint(1, 4)))
            zs = set(rng.sample(zones, rng.randint(1, 3)))
            start = rng.uniform(0, 50)
            end = start + rng.uniform(0, 80)
            excl = []
            for _ in range(rng.randint(0, 3)):
                excl.append(
                    (rng.choice(classes), rng.choice(zones + [None]))  # type: ignore[arg-type]
                )
            width = rng.choice([5.0, 10.0, 30.0])
            tup = make_consent(
                action_types=frozenset(acts),
                spatial_scope=frozenset(zs),
                valid_from=start,
                valid_until=end,
                exclusions=tuple(ExclusionRule(a, z) for a, z in excl),
            )
            got = materialize_scope(tup, width)
            assert got.triples == frozenset(scope_oracle(acts, zs, start, end, excl, width))

    def test_every_triple_satisfies_membership(self):
        tup = make_consent(
            action_types=frozenset({"a", "b"}),
            spatial_scope=frozenset({"z1", "z2"}),
            valid_from=5.0,
            valid_until=42.0,
            exclusions=(ExclusionRule("a", "z2"),),
        )
        width = 10.0
        scope = materialize_scope(tup, width)
        first, last = bucket_of(5.0, width), bucket_of(42.0, width)
        for a, z, b in scope.triples:
            assert a in tup.action_types
            assert z in tup.spatial_scope
            assert first <= b <= last
            assert not any(rule.matches(a, z) for rule in tup.exclusions)

    def test_exclusion_never_enlarges(self):
        base = make_consent(
            action_types=frozenset({"a", "b"}),
            spatial_scope=frozenset({"z1", "z2"}),
            valid_until=50.0,
        )
        without = materialize_scope(base, 10.0)
        for rule in [ExclusionRule("a"), ExclusionRule("b", "z1"), ExclusionRule("x")]:
            narrowed = make_consent(
                action_types=base.action_types,
                spatial_scope=base.spatial_scope,
                valid_until=50.0,
                exclusions=(rule,),
            )
            assert len(materialize_scope(narrowed, 10.0)) <= len(without)

    def test_withdrawn_rejected(self):
        tup = withdraw(make_consent(), at=1.0)
        with pytest.raises(WithdrawnConsent):
            materialize_scope(tup, 10.0)

    def test_expired_rejected(self):
        tup = make_consent(status=ConsentStatus.EXPIRED)
        with pytest.raises(ExpiredConsent):
            materialize_scope(tup, 10.0)


class TestInScope:
    def test_match(self):
        scope = materialize_scope(make_consent(valid_until=19.0), 10.0)
        assert in_scope(scope, ActionInstance("a", "z", 5.0, "R"))

    def test_class_not_authorized(self):
        # daily-care grant does not cover medication administration
        tup = make_consent(action_types=frozenset({"daily_care"}))
        scope = materialize_scope(tup, 10.0)
        act = ActionInstance("administer_medication", "z", 5.0, "R")
        assert not in_scope(scope, act)

    def test_time_past_end(self):
        scope = materialize_scope(make_consent(valid_until=19.0), 10.0)
        assert not in_scope(scope, ActionInstance("a", "z", 25.0, "R"))

    def test_determinism(self):
        scope = materialize_scope(make_consent(valid_until=19.0), 10.0)
        a1 = ActionInstance("a", "z", 5.0, "R1")
        a2 = ActionInstance("a", "z", 5.0, "R2")
        assert in_scope(scope, a1) == in_scope(scope, a2)


class TestWithdraw:
    def test_withdraw_records_time(self):
        tup = withdraw(make_consent(), at=100.0)
        assert tup.status is ConsentStatus.WITHDRAWN
        assert tup.withdrawn_at == 100.0

    def test_original_unchanged(self):
        orig = make_consent()
        withdraw(orig, at=100.0)
        assert orig.status is ConsentStatus.ACTIVE

    def test_double_withdraw(self):
        tup = withdraw(make_consent(), at=1.0)
        with pytest.raises(AlreadyWithdrawn):
            withdraw(tup, at=2.0)

    def test_status_at_expiry(self):
        tup = make_consent(valid_until=50.0)
        assert status_at(tup, 50.0) is ConsentStatus.ACTIVE
        assert status_at(tup, 50.1) is ConsentStatus.EXPIRED
        assert status_at(withdraw(tup, 10.0), 99.0) is ConsentStatus.WITHDRAWN


class TestScopeSet:
    def test_width_mismatch(self):
        s1 = ScopeSet(frozenset({("a", "z", 0)}), 10.0)
        s2 = ScopeSet(frozenset({("a", "z", 0)}), 5.0)
        with pytest.raises(BucketWidthMismatch):
            s1.intersection(s2)

    def test_json_round_trip(self):
        s = ScopeSet(frozenset({("a", "z", 0), ("b", "z", 3)}), 10.0)
        assert ScopeSet.from_json_obj(s.to_json_obj()) == s

    def test_sorted_is_stable(self):
        s = ScopeSet(frozenset({("b", "z", 1), ("a", "z", 2), ("a", "z", 0)}), 1.0)
        assert s.sorted_triples() == [("a", "z", 0), ("a", "z", 2), ("b", "z", 1)]


def test_structural_ambiguity_diagnostic():
    fully_open = make_consent(
        action_types=frozenset({"*"}), spatial_scope=frozenset({"*"})
    )
    assert estimate_ambiguity(fully_open) == pytest.approx(2 / 3)
    assert estimate_ambiguity(make_consent()) == 0.0
