"""Exception hierarchy shared by every module.

The CLI maps :class:`UsageError` to exit code 1 and
:class:`ConditionError` (plus its subclasses) to exit code 2.
"""


class InvStabError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(InvStabError, ValueError):
    """Malformed input: wrong shapes, invalid parameters, bad JSON."""


class BoundaryError(InvStabError, ValueError):
    """A point lies on a separating hyperplane of some neuron."""

    def __init__(self, neuron: int, value: float):
        self.neuron = neuron
        self.value = value
        super().__init__(
            f"point lies on the hyperplane of neuron {neuron} (<a_i, x> = {value:.3e})"
        )


class CapacityError(InvStabError):
    """Problem size exceeds an enumeration or grid cap."""


class ConditionError(InvStabError):
    """A theorem hypothesis or operation precondition is violated.

    ``report`` optionally carries a structured explanation (for instance a
    :class:`~relu_invstab.canonical.ConditionReport`).
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class PreconditionError(ConditionError):
    """An input does not meet a stated precondition (rank, radius, ...)."""


class InconsistencyError(ConditionError):
    """Two objects that were supposed to agree do not."""


class SolverError(InvStabError, RuntimeError):
    """Internal LP failure (cycling guard exceeded)."""
