"""Consent scope model: structured consent records and their scope sets.

A consent record captures one human's authorization: which action classes,
in which zones, over which time window, with explicit exclusions, and whether
the authorization may be delegated onward. Scope sets discretize that
authorization into finite sets of (action_class, zone, time_bucket) triples
so later layers can take intersections and cardinalities.

All types are immutable values and every operation is a pure function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    AlreadyWithdrawn,
    BucketWidthMismatch,
    ExpiredConsent,
    InvalidInterval,
    MalformedDocument,
    SchemaViolation,
    WithdrawnConsent,
)

DOCUMENT_VERSION = 1

# Required / optional keys of a version-1 consent document. Unknown keys are
# rejected: silently dropping a field could widen the effective scope.
_REQUIRED_FIELDS = {
    "version",
    "human_id",
    "action_types",
    "spatial_scope",
    "validity",
    "ambiguity",
}
_OPTIONAL_FIELDS = {"exclusions", "delegable"}


class ConsentStatus(str, Enum):
    ACTIVE = "active"
    WITHDRAWN = "withdrawn"
    EXPIRED = "expired"


@dataclass(frozen=True, slots=True)
class ExclusionRule:
    """Explicitly forbidden action class, optionally restricted to one zone.

    A rule with ``zone=None`` forbids the action class everywhere; with a
    zone it forbids only that (action_class, zone) pair. Exclusions override
    the authorized action set.
    """

    action_class: str
    zone: str | None = None

    def matches(self, action_class: str, zone: str) -> bool:
        if action_class != self.action_class:
            return False
        return self.zone is None or self.zone == zone


@dataclass(frozen=True, slots=True)
class ConsentTuple:
    """One human's structured authorization.

    Attributes:
        human_id: the consenting human.
        action_types: authorized action classes.
        spatial_scope: authorized zone identifiers.
        valid_from / valid_until: closed validity window in simulation seconds.
        exclusions: rules that remove triples from the materialized scope.
        delegable: whether the authorization may be delegated onward.
            Defaults to False (default-deny).
        ambiguity: declared scope ambiguity in [0, 1]. This is an input,
            not something the engine computes (see ``estimate_ambiguity``
            for the optional structural diagnostic).
        status / withdrawn_at: lifecycle state.
    """

    human_id: str
    action_types: frozenset[str]
    spatial_scope: frozenset[str]
    valid_from: float
    valid_until: float
    exclusions: tuple[ExclusionRule, ...] = ()
    delegable: bool = False
    ambiguity: float = 0.0
    status: ConsentStatus = ConsentStatus.ACTIVE
    withdrawn_at: float | None = None

    def __post_init__(self) -> None:
        if self.valid_from > self.valid_until:
            raise InvalidInterval(
                f"validity start {self.valid_from} is after end {self.valid_until}"
            )
        if not 0.0 <= self.ambiguity <= 1.0:
            raise SchemaViolation(f"ambiguity {self.ambiguity} outside [0, 1]")


@dataclass(frozen=True, slots=True)
class ScopeSet:
    """Finite set of authorized (action_class, zone, time_bucket) triples.

    Time bucket ``b`` covers the half-open interval
    ``[b * bucket_width, (b + 1) * bucket_width)``. All triples in one set
    share the same bucket width; cross-set operations require equal widths.
    """

    triples: frozenset[tuple[str, str, int]]
    bucket_width: float

    def __post_init__(self) -> None:
        if self.bucket_width <= 0:
            raise ValueError("bucket_width must be positive")

    def __len__(self) -> int:
        return len(self.triples)

    def _check_compatible(self, other: ScopeSet) -> None:
        if self.bucket_width != other.bucket_width:
            raise BucketWidthMismatch(
                f"bucket widths differ: {self.bucket_width} vs {other.bucket_width}"
            )

    def intersection(self, other: ScopeSet) -> ScopeSet:
        self._check_compatible(other)
        return ScopeSet(self.triples & other.triples, self.bucket_width)

    def union(self, other: ScopeSet) -> ScopeSet:
        self._check_compatible(other)
        return ScopeSet(self.triples | other.triples, self.bucket_width)

    def issubset(self, other: ScopeSet) -> bool:
        self._check_compatible(other)
        return self.triples <= other.triples

    def sorted_triples(self) -> list[tuple[str, str, int]]:
        return sorted(self.triples)

    def to_json_obj(self) -> dict:
        """Stable JSON form: sorted triple list, suitable for golden files."""
        return {
            "bucket_width": self.bucket_width,
            "triples": [list(t) for t in self.sorted_triples()],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> ScopeSet:
        triples = frozenset((str(a), str(z), int(b)) for a, z, b in obj["triples"])
        return cls(triples, float(obj["bucket_width"]))


@dataclass(frozen=True, slots=True)
class ActionInstance:
    """A concrete physical action requested by an agent."""

    action_class: str
    zone: str
    time: float
    agent: str

    def __post_init__(self) -> None:
        if self.time < 0:
            raise ValueError("action time must be non-negative")


def bucket_of(time: float, bucket_width: float) -> int:
    """Time bucket index containing ``time``."""
    return math.floor(time / bucket_width)


def parse_consent_document(doc: bytes | str) -> ConsentTuple:
    """Parse and validate a version-1 consent document.

    Raises:
        MalformedDocument: not valid JSON or not a JSON object.
        SchemaViolation: missing/unknown fields, wrong types, bad version,
            or ambiguity outside [0, 1].
        InvalidInterval: validity start after end.
    """
    if isinstance(doc, bytes):
        try:
            doc = doc.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"document is not valid UTF-8: {exc}") from exc
    try:
        raw = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"document is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedDocument("document root must be a JSON object")
    return consent_from_obj(raw)


def consent_from_obj(raw: dict) -> ConsentTuple:
    """Validate an already-decoded consent document object."""
    missing = _REQUIRED_FIELDS - raw.keys()
    if missing:
        raise SchemaViolation(f"missing required fields: {sorted(missing)}")
    unknown = raw.keys() - _REQUIRED_FIELDS - _OPTIONAL_FIELDS
    if unknown:
        raise SchemaViolation(f"unknown fields rejected: {sorted(unknown)}")
    if raw["version"] != DOCUMENT_VERSION:
        raise SchemaViolation(f"unsupported document version {raw['version']!r}")

    human_id = _expect_str(raw, "human_id")
    action_types = _expect_str_list(raw, "action_types")
    spatial_scope = _expect_str_list(raw, "spatial_scope")

    validity = raw["validity"]
    if (
        not isinstance(validity, dict)
        or validity.keys() != {"start", "end"}
        or not all(isinstance(validity[k], (int, float)) for k in ("start", "end"))
    ):
        raise SchemaViolation("validity must be an object {start: number, end: number}")

    ambiguity = raw["ambiguity"]
    if not isinstance(ambiguity, (int, float)) or isinstance(ambiguity, bool):
        raise SchemaViolation("ambiguity must be a number")
    if not 0.0 <= ambiguity <= 1.0:
        raise SchemaViolation(f"ambiguity {ambiguity} outside [0, 1]")

    exclusions = []
    for entry in raw.get("exclusions", []):
        if not isinstance(entry, dict) or "action_class" not in entry:
            raise SchemaViolation(f"bad exclusion entry: {entry!r}")
        extra = entry.keys() - {"action_class", "zone"}
        if extra:
            raise SchemaViolation(f"unknown exclusion fields: {sorted(extra)}")
        zone = entry.get("zone")
        if zone is not None and not isinstance(zone, str):
            raise SchemaViolation("exclusion zone must be a string")
        exclusions.append(ExclusionRule(str(entry["action_class"]), zone))

    delegable = raw.get("delegable", False)
    if not isinstance(delegable, bool):
        raise SchemaViolation("delegable must be a boolean")

    return ConsentTuple(
        human_id=human_id,
        action_types=frozenset(action_types),
        spatial_scope=frozenset(spatial_scope),
        valid_from=float(validity["start"]),
        valid_until=float(validity["end"]),
        exclusions=tuple(exclusions),
        delegable=delegable,
        ambiguity=float(ambiguity),
    )


def consent_to_obj(tup: ConsentTuple) -> dict:
    """Stable document form of a consent record (sorted sets, fixed key order)."""
    obj = {
        "version": DOCUMENT_VERSION,
        "human_id": tup.human_id,
        "action_types": sorted(tup.action_types),
        "spatial_scope": sorted(tup.spatial_scope),
        "validity": {"start": tup.valid_from, "end": tup.valid_until},
        "exclusions": [
            {"action_class": e.action_class, **({"zone": e.zone} if e.zone else {})}
            for e in tup.exclusions
        ],
        "delegable": tup.delegable,
        "ambiguity": tup.ambiguity,
    }
    return obj


def _expect_str(raw: dict, key: str) -> str:
    value = raw[key]
    if not isinstance(value, str) or not value:
        raise SchemaViolation(f"{key} must be a non-empty string")
    return value


def _expect_str_list(raw: dict, key: str) -> list[str]:
    value = raw[key]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"{key} must be a list of strings")
    return value


def materialize_scope(tup: ConsentTuple, bucket_width: float) -> ScopeSet:
    """Discretize a consent record into its authorized triples.

    The result contains every (action_class, zone, bucket) with the class in
    the authorized set, the zone in the spatial scope, and the bucket
    overlapping the closed validity window - minus any triple matched by an
    exclusion rule.

    Raises:
        WithdrawnConsent / ExpiredConsent: the record is no longer active.
    """
    if tup.status is ConsentStatus.WITHDRAWN:
        raise WithdrawnConsent(f"consent of {tup.human_id} was withdrawn")
    if tup.status is ConsentStatus.EXPIRED:
        raise ExpiredConsent(f"consent of {tup.human_id} has expired")
    if bucket_width <= 0:
        raise ValueError("bucket_width must be positive")

    first = bucket_of(tup.valid_from, bucket_width)
    last = bucket_of(tup.valid_until, bucket_width)
    triples = set()
    for action in tup.action_types:
        for zone in tup.spatial_scope:
            if any(rule.matches(action, zone) for rule in tup.exclusions):
                continue
            for bucket in range(first, last + 1):
                triples.add((action, zone, bucket))
    return ScopeSet(frozenset(triples), bucket_width)


def in_scope(scope: ScopeSet, action: ActionInstance) -> bool:
    """True iff the action's (class, zone, bucket) triple is authorized."""
    triple = (action.action_class, action.zone, bucket_of(action.time, scope.bucket_width))
    return triple in scope.triples


def withdraw(tup: ConsentTuple, at: float) -> ConsentTuple:
    """Return a withdrawn copy of an active consent (the input is unchanged).

    Raises:
        AlreadyWithdrawn: the consent was withdrawn before.
        ExpiredConsent: only active consents can be withdrawn.
    """
    if tup.status is ConsentStatus.WITHDRAWN:
        raise AlreadyWithdrawn(f"consent of {tup.human_id} already withdrawn")
    if tup.status is ConsentStatus.EXPIRED:
        raise ExpiredConsent(f"consent of {tup.human_id} has expired")
    return replace(tup, status=ConsentStatus.WITHDRAWN, withdrawn_at=at)


def ambiguity_of(tup: ConsentTuple) -> float:
    """The declared scope ambiguity of the consent record."""
    return tup.ambiguity


def status_at(tup: ConsentTuple, now: float) -> ConsentStatus:
    """Lifecycle state as observed at time ``now``.

    Explicit withdrawal wins over temporal expiry; an active record past its
    validity end reads as expired.
    """
    if tup.status is ConsentStatus.WITHDRAWN:
        return ConsentStatus.WITHDRAWN
    if tup.status is ConsentStatus.EXPIRED or now > tup.valid_until:
        return ConsentStatus.EXPIRED
    return ConsentStatus.ACTIVE


WILDCARD = "*"


def estimate_ambiguity(tup: ConsentTuple) -> float:
    """Structural ambiguity diagnostic: fraction of wildcarded dimensions.

    Each of the three scope dimensions (action classes, zones, time) that is
    left fully open contributes 1/3. A set dimension is open when it is the
    single wildcard marker ``"*"``; the time dimension is never open under
    the version-1 document schema, which requires a bounded window.

    Diagnostic only - the severity indicator always uses the declared
    ambiguity field.
    """
    open_dims = 0
    if tup.action_types == frozenset({WILDCARD}):
        open_dims += 1
    if tup.spatial_scope == frozenset({WILDCARD}):
        open_dims += 1
    return open_dims / 3.0
