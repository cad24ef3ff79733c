"""Verification reports: per-identity residuals with pass/fail flags."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .scalars import magnitude


@dataclass
class Entry:
    id: str
    anchor: str
    residual: Any
    passed: bool
    witness: Optional[str] = None
    exact: bool = False

    def residual_float(self) -> float:
        r = self.residual
        if isinstance(r, Fraction):
            return float(r)
        return float(r)


@dataclass
class Report:
    suite: str
    instance: str = ""
    config: Dict[str, Any] = field(default_factory=dict)
    entries: List[Entry] = field(default_factory=list)
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, entry: Entry) -> Entry:
        self.entries.append(entry)
        return entry

    def exact(self, id: str, anchor: str, residual, witness: Optional[str] = None) -> Entry:
        """Record an identity that must hold with residual exactly zero."""
        residual = magnitude(residual) if not isinstance(residual, Fraction) else residual
        ok = residual == 0
        return self.add(Entry(id, anchor, residual, ok, None if ok else witness, exact=True))

    def approx(self, id: str, anchor: str, residual: float, tol: float,
               witness: Optional[str] = None) -> Entry:
        residual = float(residual)
        ok = math.isfinite(residual) and residual < tol
        return self.add(Entry(id, anchor, residual, ok, None if ok else witness))

    def flag(self, id: str, anchor: str, ok: bool, residual=0.0,
             witness: Optional[str] = None) -> Entry:
        return self.add(Entry(id, anchor, residual, bool(ok), None if ok else witness))

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        for e in other.entries:
            self.entries.append(Entry(prefix + e.id, e.anchor, e.residual, e.passed,
                                      e.witness, e.exact))
        for k, v in other.notes.items():
            self.notes[prefix + k] = v
        return self

    def entry(self, id: str) -> Entry:
        for e in self.entries:
            if e.id == id:
                return e
        raise KeyError(id)

    def max_residual(self) -> float:
        return max((e.residual_float() for e in self.entries), default=0.0)

    def sorted(self) -> "Report":
        return Report(self.suite, self.instance, dict(self.config),
                      sorted(self.entries, key=lambda e: e.id), dict(self.notes))

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "suite": self.suite,
            "instance": self.instance,
            "config": self.config,
            "entries": [],
            "pass": self.passed,
        }
        for e in sorted(self.entries, key=lambda e: e.id):
            d = {"id": e.id, "anchor": e.anchor, "residual": e.residual_float(),
                 "pass": e.passed}
            if e.witness is not None:
                d["witness"] = e.witness
            out["entries"].append(d)
        if self.notes:
            out["notes"] = self.notes
        return out

    def to_json(self) -> str:
        return dumps_canonical(self.to_dict()) + "\n"

    def to_text(self) -> str:
        lines = [f"suite {self.suite} on {self.instance}"]
        for k in sorted(self.config):
            lines.append(f"  {k} = {_text_value(self.config[k])}")
        for e in sorted(self.entries, key=lambda e: e.id):
            mark = "PASS" if e.passed else "FAIL"
            res = "0 (exact)" if e.exact and e.passed else format(e.residual_float(), ".3e")
            line = f"[{mark}] {e.id:<48} residual {res:<12} {e.anchor}"
            if e.witness:
                line += f"  witness: {e.witness}"
            lines.append(line)
        for k in sorted(self.notes):
            lines.append(f"  note {k}: {_text_value(self.notes[k])}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _text_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def dumps_canonical(obj) -> str:
    """JSON with sorted keys and floats printed with 17 significant digits."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {dumps_canonical(obj[k])}" for k in sorted(obj))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps_canonical(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(str(obj))
        return format(obj, ".17g") if obj != int(obj) or abs(obj) >= 1e16 else format(obj, ".1f")
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, complex):
        return dumps_canonical([obj.real, obj.imag])
    return json.dumps(str(obj))
