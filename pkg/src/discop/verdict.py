"""Verdicts with witnesses, shared by the decision procedures."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Tuple


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    VERIFIED_ON_WINDOW = "verified_on_window"


@dataclass(frozen=True)
class Witness:
    """A counterexample: the points involved and both sides of the violated identity.

    ``lhs``/``rhs`` are exact values (Fraction, FinSuppFn, CRat or INFINITE_MASS).
    ``order`` carries the iterate n for power-type conditions.
    """

    kind: str
    points: Tuple[Any, ...]
    lhs: Any = None
    rhs: Any = None
    detail: str = ""
    order: Optional[int] = None


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Optional[Witness] = None
    window: Optional[int] = None
    checks: Tuple[Tuple[str, bool], ...] = ()

    @classmethod
    def fails(cls, witness: Witness, window: Optional[int] = None) -> "Verdict":
        return cls(Status.FAILS, witness, window)

    @classmethod
    def passed(cls, exact: bool, window: Optional[int] = None, checks=()) -> "Verdict":
        if exact:
            return cls(Status.HOLDS, checks=tuple(checks))
        return cls(Status.VERIFIED_ON_WINDOW, window=window, checks=tuple(checks))

    @property
    def ok(self) -> bool:
        """True unless the condition was refuted."""
        return self.status is not Status.FAILS

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    def __str__(self) -> str:
        if self.status is Status.FAILS:
            w = self.witness
            return f"fails ({w.kind} at {', '.join(map(repr, w.points))})"
        if self.status is Status.VERIFIED_ON_WINDOW:
            return f"verified on window {self.window}"
        return "holds"
