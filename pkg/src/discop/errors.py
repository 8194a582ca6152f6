"""Exception hierarchy shared by every discop module."""

from __future__ import annotations

from typing import Any


class DiscopError(Exception):
    """Base class for all discop errors."""


class MissingWindow(DiscopError):
    """A lazily described instance was queried without an enumeration window."""

    def __init__(self, operation: str = "") -> None:
        super().__init__(f"{operation or 'query'} on a lazy instance requires a window")


class NotNonsingular(DiscopError):
    def __init__(self, witness: Any) -> None:
        self.witness = witness
        super().__init__(f"map is singular: null point {witness!r} receives positive mass")


class NotDenselyDefined(DiscopError):
    def __init__(self, witness: Any) -> None:
        self.witness = witness
        super().__init__(f"fiber over {witness!r} carries infinite mass")


class InfiniteFiber(DiscopError):
    def __init__(self, witness: Any) -> None:
        self.witness = witness
        super().__init__(f"fiber over {witness!r} carries infinite mass")


class NotInDomain(DiscopError):
    def __init__(self, witness: Any) -> None:
        self.witness = witness
        super().__init__(f"function is not in the domain: fiber over {witness!r} is infinite")


class NotInSupport(DiscopError):
    def __init__(self, point: Any) -> None:
        self.point = point
        super().__init__(f"point {point!r} has zero measure")


class NotBijectiveOnSupport(DiscopError):
    def __init__(self, witness: Any) -> None:
        self.witness = witness
        super().__init__(f"map is not bijective on the support: {witness}")


class NotNormal(DiscopError):
    def __init__(self, verdict: Any) -> None:
        self.verdict = verdict
        super().__init__(f"operator is not normal: {verdict}")


class MalformedDecomposition(DiscopError):
    pass


class TemplateLacksInfiniteOrbits(DiscopError):
    pass


class RatiosNotDivergent(DiscopError):
    pass


class BadParameters(DiscopError):
    pass


class ParseError(DiscopError):
    def __init__(self, location: str, message: str) -> None:
        self.location = location
        super().__init__(f"{location}: {message}")


class ValidationError(DiscopError):
    def __init__(self, field: str, reason: str) -> None:
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")
