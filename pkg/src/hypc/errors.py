"""Exception hierarchy shared by all pipeline stages.

Each class maps to a stable CLI exit code: input-contract violations
exit 2, data integrity violations exit 3, capacity overruns exit 4.
"""


class PipelineError(Exception):
    exit_code = 1


class DomainError(PipelineError):
    """An argument refers to something outside the declared universe."""

    exit_code = 2


class PreconditionError(PipelineError):
    """An operation's stated input contract does not hold."""

    exit_code = 2


class IntegrityError(PipelineError):
    """Loaded data violates a key or alignment constraint."""

    exit_code = 3


class CapacityError(PipelineError):
    """An exact computation would exceed its configured cap."""

    exit_code = 4
