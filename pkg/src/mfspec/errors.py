"""Exception hierarchy shared by every module."""
from __future__ import annotations


class MfspecError(Exception):
    """Base class for all library errors."""


class InvalidSystem(MfspecError):
    """The symbolic system itself is unusable."""


class NotIrreducible(InvalidSystem):
    pass


class EmptyRow(InvalidSystem):
    pass


class NotMarkov(InvalidSystem):
    pass


class ResourceLimit(MfspecError):
    pass


class DepthMismatch(MfspecError, ValueError):
    pass


class NonConvergence(MfspecError, RuntimeError):
    pass


class ConditionViolated(MfspecError):
    """A structural condition on the potentials fails; carries a witness."""

    def __init__(self, message: str, witness: tuple[str, ...] = ()):
        super().__init__(message)
        self.witness = tuple(witness)


class ConditionQViolated(ConditionViolated):
    pass


class ConditionPViolated(ConditionViolated):
    pass


class BoundaryUnresolved(MfspecError):
    pass


class Infeasible(MfspecError):
    pass


class ExcludedAlpha(MfspecError, ValueError):
    pass


class UnknownFormula(MfspecError, KeyError):
    pass
