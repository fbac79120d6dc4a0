"""Validation reports shared by every axiom checker in the package."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: Any = None

    def __str__(self) -> str:
        if self.witness is None:
            return self.axiom
        return f"{self.axiom}: {self.witness}"


@dataclass
class Report:
    """An ordered list of violated axioms; empty means the object is valid."""

    violations: list[Violation] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    def add(self, axiom: str, witness: Any = None) -> None:
        self.violations.append(Violation(axiom, witness))

    def extend(self, other: "Report", prefix: str = "") -> None:
        for v in other.violations:
            self.violations.append(Violation(prefix + v.axiom, v.witness))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __len__(self) -> int:
        return len(self.violations)

    def axioms(self) -> list[str]:
        return [v.axiom for v in self.violations]

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


class ValidationError(ValueError):
    """Raised when a constructor receives data that fails its axioms."""

    def __init__(self, message: str, report: Report | None = None):
        super().__init__(message if report is None else f"{message}\n{report}")
        self.report = report
