"""Shared severity tiers and the violation record used across the toolkit."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Severity(enum.Enum):
    """The four fault tiers, ordered from worst to mildest."""

    FATAL = "Fatal"
    MAJOR = "Major"
    MINOR = "Minor"
    WARNING = "Warning"

    def __str__(self) -> str:
        return self.value


# "Critical" is an accepted alias for the top tier in serialized input.
_SEVERITY_ALIASES = {
    "fatal": Severity.FATAL,
    "critical": Severity.FATAL,
    "major": Severity.MAJOR,
    "minor": Severity.MINOR,
    "warning": Severity.WARNING,
    "warnings": Severity.WARNING,
}


def parse_severity(text: str) -> Severity:
    try:
        return _SEVERITY_ALIASES[text.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown severity {text!r}") from None


@dataclass(frozen=True)
class Violation:
    """One rule finding: what went wrong, how bad, and where."""

    rule_id: str
    severity: Severity
    message: str
    subjects: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "rule_id": self.rule_id,
            "severity": self.severity.value,
            "message": self.message,
            "subjects": list(self.subjects),
        }


def violation_from_dict(data: dict[str, Any]) -> Violation:
    return Violation(
        rule_id=str(data.get("rule_id", "unspecified")),
        severity=parse_severity(str(data["severity"])),
        message=str(data.get("message", "")),
        subjects=[str(s) for s in data.get("subjects", [])],
    )


def count_by_severity(violations: list[Violation]) -> dict[Severity, int]:
    counts = {sev: 0 for sev in Severity}
    for violation in violations:
        counts[violation.severity] += 1
    return counts
