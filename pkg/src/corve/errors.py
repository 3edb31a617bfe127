"""Exception hierarchy for the consent verification engine.

Every error raised by the engine derives from :class:`CorveError` so callers
can catch the whole family at an API boundary (the CLI maps them to exit 2,
the service to 4xx responses).
"""


class CorveError(Exception):
    """Base class for all engine errors."""


# --- consent documents and scope sets ---------------------------------------

class MalformedDocument(CorveError):
    """Consent document is not syntactically valid JSON."""


class SchemaViolation(CorveError):
    """Consent document violates the schema (missing field, unknown field,
    wrong type, or out-of-range value)."""


class InvalidInterval(CorveError):
    """Validity window has start > end."""


class WithdrawnConsent(CorveError):
    """Operation requires an active consent but it was withdrawn."""


class ExpiredConsent(CorveError):
    """Operation requires an active consent but it has expired."""


class AlreadyWithdrawn(CorveError):
    """Withdrawal requested twice for the same consent."""


class BucketWidthMismatch(CorveError):
    """Two scope sets with different time-bucket widths were combined."""


# --- delegation tracking -----------------------------------------------------

class DelegationForbidden(CorveError):
    """Root consent does not permit delegation (delegable flag is false)."""


class UnknownDelegator(CorveError):
    """Delegating agent holds no effective consent in the graph."""


class UnknownAgent(CorveError):
    """Agent is not reachable in the provenance graph."""


class CycleDetected(CorveError):
    """Delegation would hand consent back to an ancestor (or to itself)."""


class EmptyDelegatedScope(CorveError):
    """Delegation carries an empty scope."""


class DuplicateGrant(CorveError):
    """Receiving agent already holds a consent chain from this root."""


class DelegationExceedsScope(CorveError):
    """Delegated scope is not a subset of the delegator's effective scope."""


class BothEmpty(CorveError):
    """Drift is undefined when both scope sets are empty."""


class EmptyEffectiveScope(CorveError):
    """Scope creep is undefined for an empty effective scope."""


# --- irreversibility ----------------------------------------------------------

class UnknownActionClass(CorveError):
    """Action class missing from the catalog under reject_unknown policy."""


class OutOfRange(CorveError):
    """Scalar outside its admissible range (scores and ambiguities live in
    [0, 1])."""


# --- severity policy ----------------------------------------------------------

class NegativeDuration(CorveError):
    """A temporal gap must be non-negative."""


class InvalidProfile(CorveError):
    """Policy profile weights are invalid (must be >= 0 and sum to 1)."""


# --- simulator -----------------------------------------------------------------

class MalformedSpec(CorveError):
    """Scenario file is syntactically or structurally invalid."""


class UnknownAgentReference(CorveError):
    """Scenario script references an agent that was never declared."""


class UnknownProfile(CorveError):
    """Scenario references a policy profile that cannot be resolved."""


class UnknownHuman(CorveError):
    """Withdrawal names a human who holds no consent in the scenario."""


# --- event store -----------------------------------------------------------------

class OutOfOrderEvent(CorveError):
    """Appended event does not come strictly after the last stored event."""


class StorageFailure(CorveError):
    """Segment could not be written or is internally inconsistent."""


class ChecksumMismatch(CorveError):
    """Stored segment bytes do not match the recorded checksum."""


# --- service -----------------------------------------------------------------------

class UnknownRequest(CorveError):
    """No pending request with this id."""


class AlreadyAnswered(CorveError):
    """Request already received its terminal answer."""


class DeadlineExpired(CorveError):
    """Answer arrived after the request deadline (treated as a deny)."""
