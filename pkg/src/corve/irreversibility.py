"""Physical irreversibility scoring and tier classification.

Irreversibility is a catalog input, not something computed from physics: each
action class carries a score in [0, 1], and the tier boundaries partition
that range. Unknown classes are handled per the catalog's default policy;
the fail-safe default treats them as maximally irreversible.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .errors import MalformedDocument, OutOfRange, SchemaViolation, UnknownActionClass

REJECT_UNKNOWN = "reject_unknown"
ASSUME_TIER3 = "assume_tier3"

TIER2_FLOOR = 0.3
TIER3_FLOOR = 0.7


class Tier(enum.IntEnum):
    """Irreversibility tier; ordering reflects increasing severity."""

    TIER1 = 1
    TIER2 = 2
    TIER3 = 3

    @property
    def label(self) -> str:
        return f"tier{self.value}"


@dataclass(frozen=True, slots=True)
class IrreversibilityCatalog:
    """Map from action class to IR score, with an unknown-class policy."""

    entries: dict[str, float] = field(default_factory=dict)
    default_policy: str = ASSUME_TIER3

    def __post_init__(self) -> None:
        if self.default_policy not in (REJECT_UNKNOWN, ASSUME_TIER3):
            raise SchemaViolation(f"unknown default policy {self.default_policy!r}")
        for name, score in self.entries.items():
            if not 0.0 <= score <= 1.0:
                raise SchemaViolation(f"IR score for {name!r} outside [0, 1]: {score}")


def ir_score(catalog: IrreversibilityCatalog, action_class: str) -> float:
    """IR score for an action class.

    Unknown classes either raise (reject_unknown) or score 1.0
    (assume_tier3, the fail-safe maximum).
    """
    if action_class in catalog.entries:
        return catalog.entries[action_class]
    if catalog.default_policy == REJECT_UNKNOWN:
        raise UnknownActionClass(f"no IR score for action class {action_class!r}")
    return 1.0


def classify_tier(ir: float) -> Tier:
    """Tier for an IR score; intervals are closed on the left.

    Tier1: ir < 0.3; Tier2: 0.3 <= ir < 0.7; Tier3: ir >= 0.7.
    """
    if not 0.0 <= ir <= 1.0:
        raise OutOfRange(f"IR score {ir} outside [0, 1]")
    if ir < TIER2_FLOOR:
        return Tier.TIER1
    if ir < TIER3_FLOOR:
        return Tier.TIER2
    return Tier.TIER3


def parse_catalog(doc: bytes | str) -> IrreversibilityCatalog:
    """Parse a catalog file: JSON map of class to score plus "_default_policy"."""
    if isinstance(doc, bytes):
        doc = doc.decode("utf-8")
    try:
        raw = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedDocument("catalog root must be a JSON object")
    policy = raw.pop("_default_policy", ASSUME_TIER3)
    if not isinstance(policy, str):
        raise SchemaViolation("_default_policy must be a string")
    entries = {}
    for name, score in raw.items():
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise SchemaViolation(f"IR score for {name!r} must be a number")
        entries[name] = float(score)
    return IrreversibilityCatalog(entries=entries, default_policy=policy)
