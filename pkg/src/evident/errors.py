"""Domain errors shared by every layer.

Each error carries a stable ``code`` (its class name) and the ids it
concerns; the CLI prints the code, the HTTP facade maps it to a status.
"""

from __future__ import annotations


class EvidentError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str, *ids: str):
        super().__init__(message)
        self.ids = tuple(ids)

    @property
    def code(self) -> str:
        return type(self).__name__


class EmptyPayload(EvidentError):
    pass


class MalformedPayload(EvidentError):
    pass


class InvalidOutcome(EvidentError):
    pass


class InvalidTarget(EvidentError):
    pass


class KindMismatch(EvidentError):
    pass


class SingleObservationViolation(EvidentError):
    pass


class CycleDetected(EvidentError):
    pass


class InvalidPremise(EvidentError):
    pass


class DanglingReference(EvidentError):
    pass


class NotATest(EvidentError):
    pass


class NotAHypothesis(EvidentError):
    pass


class NotDeduction(EvidentError):
    pass


class Unclassifiable(EvidentError):
    pass


class InvalidWinner(EvidentError):
    pass


class WinnerConflict(EvidentError):
    pass


class ValidationRejected(EvidentError):
    """An event was refused because the resulting state would be invalid."""

    def __init__(self, cause: EvidentError):
        super().__init__(str(cause), *cause.ids)
        self.cause = cause

    @property
    def code(self) -> str:
        # Surface the underlying rule, not the wrapper.
        return self.cause.code


class ChainCorrupt(EvidentError):
    pass


class MalformedInput(EvidentError):
    pass


class NotSelectable(EvidentError):
    pass


class UnknownHypothesis(EvidentError):
    pass


class UnknownObservation(EvidentError):
    pass


class UnknownId(EvidentError):
    pass


class AmbiguousId(EvidentError):
    pass


class ResultInvalid(EvidentError):
    pass


class WorkspaceLocked(EvidentError):
    pass
