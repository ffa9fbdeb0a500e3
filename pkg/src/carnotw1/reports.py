"""Check reports and their CSV / JSON renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence


def fmt(x: float) -> str:
    """Render a real with 12 significant digits."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def fmt_point(p) -> str:
    return "(" + ",".join(fmt(float(c)) for c in p) + ")"


def fmt_pair(p, q) -> str:
    return fmt_point(p) + ";" + fmt_point(q)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return v.item()
    return v


def to_json(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


@dataclass
class Check:
    """One line of a report.

    ``worst`` is a slack (negative means violated) for inequality checks and a
    nonnegative deviation for equality checks; ``passed`` is decided by the
    producer, which knows which reading applies.
    """

    name: str
    worst: float
    passed: bool
    witness: str = ""


@dataclass
class CheckReport:
    title: str
    checks: list[Check] = field(default_factory=list)
    flags: dict[str, Any] = field(default_factory=dict)
    style: str = "slack"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_csv(self) -> str:
        if self.style == "deviation":
            return to_csv(
                ("check_name", "status", "worst_deviation"),
                ((c.name, "pass" if c.passed else "FAIL", float(c.worst)) for c in self.checks),
            )
        return to_csv(
            ("check", "worst_slack", "argmax_pair"),
            ((c.name, float(c.worst), c.witness) for c in self.checks),
        )

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "flags": self.flags,
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self) -> str:
        return to_json(self.to_dict())

    def summary(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.passed else 'XX'}] {c.name}: {fmt(float(c.worst))}")
        return "\n".join(lines)
