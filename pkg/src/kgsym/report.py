"""Check records, run reports and their text / JSON renderings.

The JSON document has the shape

    {"meta": {"seed": int, "tol": float, "version": str},
     "checks": [{"id", "description", "anchor", "status", "residual"}, ...],
     "summary": {"pass": int, "fail": int, "flagged": int}}

Floats are written with 17 significant digits; non-finite residuals become
null.  Key order and record order are fixed, so a report is byte-stable for
a given seed and version.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import __version__

PASS, FAIL, FLAGGED = "pass", "fail", "flagged-typo"
STATUSES = (PASS, FAIL, FLAGGED)


@dataclass(frozen=True)
class CheckRecord:
    id: str
    description: str
    anchor: str
    status: str
    residual: float = 0.0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")

    def as_dict(self) -> dict:
        return {"id": self.id, "description": self.description, "anchor": self.anchor,
                "status": self.status, "residual": float(self.residual)}


def reading_status(primary_ok: bool, alternative_ok: bool) -> str:
    """pass when the primary reading holds, flagged-typo when only an alternative does."""
    if primary_ok:
        return PASS
    return FLAGGED if alternative_ok else FAIL


@dataclass
class Report:
    seed: int = 42
    tol: float = 1e-9
    version: str = __version__
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)   # extra human-readable lines, text mode only

    def add(self, id: str, description: str, anchor: str, status: str, residual: float = 0.0) -> CheckRecord:
        rec = CheckRecord(id, description, anchor, status, residual)
        self.checks.append(rec)
        return rec

    def extend(self, other: "Report"):
        self.checks.extend(other.checks)
        self.notes.extend(other.notes)

    @property
    def summary(self) -> dict:
        count = {s: sum(1 for c in self.checks if c.status == s) for s in STATUSES}
        return {"pass": count[PASS], "fail": count[FAIL], "flagged": count[FLAGGED]}

    @property
    def ok(self) -> bool:
        return self.summary["fail"] == 0

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def by_id(self, id: str) -> CheckRecord:
        for c in self.checks:
            if c.id == id:
                return c
        raise KeyError(id)

    def as_dict(self) -> dict:
        return {"meta": {"seed": int(self.seed), "tol": float(self.tol), "version": self.version},
                "checks": [c.as_dict() for c in self.checks],
                "summary": self.summary}

    def to_json(self) -> str:
        return dumps(self.as_dict())

    def to_text(self) -> str:
        lines = list(self.notes)
        for c in self.checks:
            lines.append(f"{c.status.upper():<12} {c.id:<36} {format_float(c.residual):>24}  {c.description}")
        s = self.summary
        lines.append(f"summary: pass={s['pass']} fail={s['fail']} flagged={s['flagged']}")
        return "\n".join(lines)


def format_float(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        return "null"
    text = format(v, ".17g")
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with floats at 17 significant digits (json.dumps offers no float format hook)."""
    return _encode(obj)


__all__ = ["CheckRecord", "Report", "reading_status", "dumps", "format_float", "PASS", "FAIL", "FLAGGED",
           "STATUSES"]
