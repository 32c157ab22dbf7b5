"""Verdict records shared by every verification routine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Check:
    """A single named condition.

    ``informational`` checks document facts (e.g. anomalies in supplied data)
    without affecting the overall verdict.
    """

    name: str
    passed: bool
    witness: dict[str, Any] = field(default_factory=dict)
    informational: bool = False

    def record(self) -> dict[str, Any]:
        out = {"name": self.name, "verdict": "pass" if self.passed else "fail", "witness": _plain(self.witness)}
        if self.informational:
            out["informational"] = True
        return out


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    data: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def __bool__(self) -> bool:
        return self.passed

    def add(self, name: str, passed: bool, witness: dict | None = None, informational: bool = False) -> Check:
        c = Check(name, bool(passed), witness or {}, informational)
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str | None = None) -> None:
        for c in other.checks:
            name = f"{prefix}: {c.name}" if prefix else c.name
            self.checks.append(Check(name, c.passed, c.witness, c.informational))

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed and not c.informational]

    def record(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "overall": "pass" if self.passed else "fail",
            "checks": [c.record() for c in self.checks],
            "data": _plain(self.data),
        }


def _plain(x):
    """Turn witnesses into JSON-ready values with canonical scalar strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return float(f"{x:.12g}")
    return str(x)
