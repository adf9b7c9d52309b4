"""Exception types shared across the package."""


class ExmechError(Exception):
    """Base class for every package-specific error."""


class InvariantViolation(ExmechError):
    """A structural invariant of a model object does not hold."""


class ParseError(ExmechError):
    """Malformed JSON or rational-number input."""


class UnknownPair(ExmechError):
    """An action-outcome pair is not part of the ordering's partition."""


class AgentOutOfRange(ExmechError):
    """Agent index outside 0..n-1."""


class AgentMismatch(ExmechError):
    """Ordering, lottery and target pair do not belong to the same agent."""


class CapExceeded(ExmechError):
    """An enumeration would exceed the configured size cap."""


class NotVotingEnvironment(ExmechError):
    """The environment is not of the abstain-or-vote-for-a-candidate shape."""


class NotQueueingEnvironment(ExmechError):
    """The environment was not produced by the queueing-grid builder."""


class NotStrict(ExmechError):
    """A strict (all-singleton) ordering was required."""


class ActionsEqual(ExmechError):
    """Two distinct actions were required."""


class GridDoesNotSupportWitness(ExmechError):
    """The report grid lacks the points needed to build the witness."""
