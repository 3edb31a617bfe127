"""Severity indicator and runtime decision policy.

The severity indicator is a weighted sum of four normalized components:
irreversibility, elapsed time since the original grant, delegation depth,
and declared scope ambiguity. Weights come from a named policy profile and
sum to 1, so the indicator stays in [0, 1]. The decision cascade layers
hard rules (withdrawal, Tier-3 override, out-of-chain agents, scope misses)
around the numeric threshold comparison.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace

from .errors import InvalidProfile, MalformedDocument, NegativeDuration, SchemaViolation
from .irreversibility import Tier, classify_tier

WEIGHT_SUM_TOL = 1e-12

_PROFILE_FIELDS = {
    "name",
    "alpha",
    "beta",
    "gamma",
    "lambda",
    "t_max_seconds",
    "d_max",
    "threshold",
}


class Outcome(str, enum.Enum):
    PROCEED = "proceed"
    NOTIFY_AND_ACKNOWLEDGE = "notify_and_acknowledge"
    RE_CONSENT = "re_consent"
    HALT = "halt"


class Reason(str, enum.Enum):
    TIER_OVERRIDE = "tier_override"
    THRESHOLD_EXCEEDED = "threshold_exceeded"
    OUT_OF_SCOPE_AGENT = "out_of_scope_agent"
    OUT_OF_SCOPE_ACTION = "out_of_scope_action"
    WITHDRAWN = "withdrawn"


@dataclass(frozen=True, slots=True)
class Decision:
    """Outcome of the rule cascade; reason populated for every non-proceed."""

    outcome: Outcome
    reason: Reason | None = None
    detail: str = ""

    def __post_init__(self) -> None:
        if self.outcome is not Outcome.PROCEED and self.reason is None:
            raise ValueError("non-proceed decisions must carry a reason")

    def to_json_obj(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "reason": self.reason.value if self.reason else None,
            "detail": self.detail,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> Decision:
        reason = obj.get("reason")
        return cls(
            outcome=Outcome(obj["outcome"]),
            reason=Reason(reason) if reason else None,
            detail=obj.get("detail", ""),
        )


@dataclass(frozen=True, slots=True)
class PolicyProfile:
    """Named weight set plus normalization caps and the decision threshold."""

    name: str
    alpha: float
    beta: float
    gamma_w: float
    lambda_w: float
    t_max: float
    d_max: int
    threshold: float

    def __post_init__(self) -> None:
        weights = (self.alpha, self.beta, self.gamma_w, self.lambda_w)
        if any(w < 0 for w in weights):
            raise InvalidProfile(f"profile {self.name!r} has a negative weight")
        if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidProfile(
                f"profile {self.name!r} weights sum to {sum(weights)!r}, expected 1"
            )
        if self.t_max <= 0:
            raise InvalidProfile("t_max must be positive")
        if self.d_max < 1:
            raise InvalidProfile("d_max must be at least 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidProfile(f"threshold {self.threshold} outside [0, 1]")

    def weights(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma_w, self.lambda_w)


@dataclass(frozen=True, slots=True)
class NormalizedComponents:
    """The four severity inputs after normalization, with clamp flags."""

    ir: float
    dt_hat: float
    d_hat: float
    ambiguity: float
    dt_clamped: bool = False
    d_clamped: bool = False


@dataclass(frozen=True, slots=True)
class GammaAssessment:
    """Severity computation record: components, weights, value, tier, decision."""

    components: NormalizedComponents
    profile_name: str
    weights: tuple[float, float, float, float]
    threshold: float
    gamma_value: float
    tier: Tier
    decision: Decision | None = None

    def with_decision(self, decision: Decision) -> GammaAssessment:
        return replace(self, decision=decision)

    def to_json_obj(self) -> dict:
        c = self.components
        return {
            "ir": c.ir,
            "dt_hat": c.dt_hat,
            "d_hat": c.d_hat,
            "ambiguity": c.ambiguity,
            "dt_clamped": c.dt_clamped,
            "d_clamped": c.d_clamped,
            "profile": self.profile_name,
            "weights": list(self.weights),
            "threshold": self.threshold,
            "gamma": self.gamma_value,
            "tier": self.tier.label,
            "decision": self.decision.to_json_obj() if self.decision else None,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> GammaAssessment:
        decision = obj.get("decision")
        return cls(
            components=NormalizedComponents(
                ir=obj["ir"],
                dt_hat=obj["dt_hat"],
                d_hat=obj["d_hat"],
                ambiguity=obj["ambiguity"],
                dt_clamped=obj["dt_clamped"],
                d_clamped=obj["d_clamped"],
            ),
            profile_name=obj["profile"],
            weights=tuple(obj["weights"]),
            threshold=obj["threshold"],
            gamma_value=obj["gamma"],
            tier=Tier(int(obj["tier"][-1])),
            decision=Decision.from_json_obj(decision) if decision else None,
        )


def normalize_components(
    ir: float,
    delta_t: float,
    depth: int,
    ambiguity: float,
    profile: PolicyProfile,
) -> NormalizedComponents:
    """Normalize raw severity inputs against the profile caps.

    dt_hat = min(delta_t / t_max, 1) and d_hat = min(depth / d_max, 1);
    clamping is recorded so downstream reports can flag saturated inputs.
    """
    if delta_t < 0:
        raise NegativeDuration(f"elapsed time {delta_t} is negative")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if not 0.0 <= ir <= 1.0:
        raise ValueError(f"ir {ir} outside [0, 1]")
    if not 0.0 <= ambiguity <= 1.0:
        raise ValueError(f"ambiguity {ambiguity} outside [0, 1]")

    dt_raw = delta_t / profile.t_max
    d_raw = depth / profile.d_max
    return NormalizedComponents(
        ir=ir,
        dt_hat=min(dt_raw, 1.0),
        d_hat=min(d_raw, 1.0),
        ambiguity=ambiguity,
        dt_clamped=dt_raw > 1.0,
        d_clamped=d_raw > 1.0,
    )


def compute_gamma(
    components: NormalizedComponents, profile: PolicyProfile
) -> GammaAssessment:
    """Weighted severity sum over normalized components; decision not yet set."""
    c = components
    value = (
        profile.alpha * c.ir
        + profile.beta * c.dt_hat
        + profile.gamma_w * c.d_hat
        + profile.lambda_w * c.ambiguity
    )
    return GammaAssessment(
        components=c,
        profile_name=profile.name,
        weights=profile.weights(),
        threshold=profile.threshold,
        gamma_value=value,
        tier=classify_tier(c.ir),
    )


def decide(
    assessment: GammaAssessment,
    *,
    consent_active: bool,
    agent_in_chain: bool,
    action_in_scope: bool,
    lifecycle_detail: str = "",
) -> Decision:
    """Rule cascade, first match wins.

    1. Withdrawn or expired consent halts the action.
    2. Tier 3 forces re-consent regardless of the severity value.
    3. An agent outside the delegation chain attempting a Tier-2 action
       notifies the human and waits for acknowledgment.
    4. An action outside the authorized scope forces re-consent even when
       the severity value stays at or below the threshold.
    5. Severity strictly above the threshold forces re-consent.
    6. Otherwise the action proceeds.
    """
    gamma = assessment.gamma_value
    threshold = assessment.threshold
    if not consent_active:
        return Decision(Outcome.HALT, Reason.WITHDRAWN, lifecycle_detail)
    if assessment.tier is Tier.TIER3:
        return Decision(
            Outcome.RE_CONSENT,
            Reason.TIER_OVERRIDE,
            f"tier3 action requires explicit grant (gamma={gamma:.6f})",
        )
    if not agent_in_chain and assessment.tier is Tier.TIER2:
        return Decision(
            Outcome.NOTIFY_AND_ACKNOWLEDGE,
            Reason.OUT_OF_SCOPE_AGENT,
            "agent holds no delegated consent for this chain",
        )
    if not action_in_scope and gamma <= threshold:
        return Decision(
            Outcome.RE_CONSENT,
            Reason.OUT_OF_SCOPE_ACTION,
            "action triple outside the authorized scope",
        )
    if gamma > threshold:
        return Decision(
            Outcome.RE_CONSENT,
            Reason.THRESHOLD_EXCEEDED,
            f"gamma={gamma:.6f} exceeds threshold={threshold:.6f}",
        )
    return Decision(Outcome.PROCEED)


def parse_profile(doc: bytes | str) -> PolicyProfile:
    """Parse a profile file: JSON object with weights, caps, and threshold."""
    if isinstance(doc, bytes):
        doc = doc.decode("utf-8")
    try:
        raw = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"profile is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedDocument("profile root must be a JSON object")
    missing = _PROFILE_FIELDS - raw.keys()
    if missing:
        raise SchemaViolation(f"profile missing fields: {sorted(missing)}")
    unknown = raw.keys() - _PROFILE_FIELDS
    if unknown:
        raise SchemaViolation(f"unknown profile fields: {sorted(unknown)}")
    try:
        return PolicyProfile(
            name=str(raw["name"]),
            alpha=float(raw["alpha"]),
            beta=float(raw["beta"]),
            gamma_w=float(raw["gamma"]),
            lambda_w=float(raw["lambda"]),
            t_max=float(raw["t_max_seconds"]),
            d_max=int(raw["d_max"]),
            threshold=float(raw["threshold"]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaViolation(f"profile field has wrong type: {exc}") from exc


def profile_to_obj(profile: PolicyProfile) -> dict:
    return {
        "name": profile.name,
        "alpha": profile.alpha,
        "beta": profile.beta,
        "gamma": profile.gamma_w,
        "lambda": profile.lambda_w,
        "t_max_seconds": profile.t_max,
        "d_max": profile.d_max,
        "threshold": profile.threshold,
    }
