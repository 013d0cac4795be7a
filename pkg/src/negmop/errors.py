"""Exception hierarchy shared by all negmop modules."""

from __future__ import annotations

from dataclasses import dataclass


class NegotiationError(Exception):
    """Base class for every error raised by negmop."""


@dataclass(frozen=True)
class Violation:
    """One well-formedness problem found by :func:`negmop.core.validate`.

    ``kind`` is one of ``MissingDelta``, ``DomainViolation``, ``BadInitFin``,
    ``MissingOutcome`` or ``ProbSumViolation``; ``where`` names the offending
    ``(node, outcome, process)`` triple (shorter tuples when not applicable).
    """

    kind: str
    where: tuple
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {'/'.join(map(str, self.where))}: {self.message}"


class ValidationError(NegotiationError):
    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


class DiagramSyntaxError(NegotiationError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class NotEnabled(NegotiationError):
    def __init__(self, location, index: int | None = None):
        self.location = location
        self.index = index
        where = "" if index is None else f" (run position {index})"
        super().__init__(f"location {location} is not enabled{where}")


class NotDeterministic(NegotiationError):
    pass


class LimitExceeded(NegotiationError):
    """An explicit state exploration hit its configuration cap."""


class NotFound(NegotiationError):
    pass


class NotUnique(NegotiationError):
    pass


class StepLimit(NegotiationError):
    pass


class EngineInvariantBroken(NegotiationError):
    """The reduction engine met a situation its invariants rule out."""


class NotSoundEvidence(EngineInvariantBroken):
    """Raised by the engine when an invariant failure certifies an unsound input."""


class NonConfluent(EngineInvariantBroken):
    pass


class RepeatFiring(EngineInvariantBroken):
    pass


class ExitMismatch(EngineInvariantBroken):
    pass


class PreconditionViolated(NegotiationError):
    pass


class AlreadyReduced(NegotiationError):
    pass


class BadProbabilities(NegotiationError):
    pass


class UnknownLocation(NegotiationError):
    pass


class Diverged(NegotiationError):
    pass


class GenerationFailed(NegotiationError):
    pass
