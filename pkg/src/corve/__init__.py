"""Runtime consent verification for multi-robot delegation chains.

Three layers gate every delegated action: a consent scope model carrying
what a human actually authorized, a provenance tracker following how that
authority moved between agents, and an irreversibility assessor scoring
what the action would do to the world. A weighted severity score over
those signals decides whether an action proceeds, notifies, or blocks
until the human re-consents.
"""

from .consent import (
    ActionInstance,
    ConsentStatus,
    ConsentTuple,
    ExclusionRule,
    ScopeSet,
    ambiguity_of,
    consent_from_obj,
    consent_to_obj,
    in_scope,
    materialize_scope,
    parse_consent_document,
    status_at,
    withdraw,
)
from .delegation import (
    DelegationEdge,
    EffectiveConsent,
    ProvenanceGraph,
    chain_provenance,
    compute_drift,
    effective_consent,
    new_graph,
    record_delegation,
    scope_creep,
    scope_creep_of,
)
from .errors import CorveError
from .eventstore import LogSegment, read_log, replay, replay_file, write_log
from .irreversibility import (
    IrreversibilityCatalog,
    Tier,
    classify_tier,
    ir_score,
    parse_catalog,
)
from .policy import (
    Decision,
    GammaAssessment,
    NormalizedComponents,
    Outcome,
    PolicyProfile,
    Reason,
    compute_gamma,
    decide,
    normalize_components,
    parse_profile,
)
from .simulator import (
    ScenarioSpec,
    SimEvent,
    Simulation,
    assert_outcome,
    load_scenario,
    make_oracle,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "ActionInstance",
    "ConsentStatus",
    "ConsentTuple",
    "CorveError",
    "Decision",
    "DelegationEdge",
    "EffectiveConsent",
    "GammaAssessment",
    "IrreversibilityCatalog",
    "LogSegment",
    "NormalizedComponents",
    "Outcome",
    "PolicyProfile",
    "ProvenanceGraph",
    "Reason",
    "ScenarioSpec",
    "ScopeSet",
    "SimEvent",
    "Simulation",
    "Tier",
    "ambiguity_of",
    "assert_outcome",
    "chain_provenance",
    "classify_tier",
    "compute_drift",
    "compute_gamma",
    "consent_from_obj",
    "consent_to_obj",
    "decide",
    "effective_consent",
    "in_scope",
    "ir_score",
    "load_scenario",
    "make_oracle",
    "materialize_scope",
    "new_graph",
    "normalize_components",
    "parse_catalog",
    "parse_consent_document",
    "parse_profile",
    "read_log",
    "record_delegation",
    "replay",
    "replay_file",
    "run",
    "scope_creep",
    "scope_creep_of",
    "status_at",
    "withdraw",
    "write_log",
    "__version__",
]
