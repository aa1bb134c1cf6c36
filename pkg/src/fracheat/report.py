"""Verification reports: named checks with a measured value, a reference and a tolerance."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

COLUMNS = ("check", "param_json", "measured", "reference", "tol", "pass")
KINDS = ("abs", "rel", "max", "min")


def fmt(x) -> str:
    """Round-trip safe number formatting."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _jsonable(v):
    if isinstance(v, float):
        return float(fmt(v)) if math.isfinite(v) else fmt(v)
    if hasattr(v, "item"):
        return _jsonable(v.item())
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass(frozen=True)
class Entry:
    """One check. kind: abs |m-r| <= tol, rel |m-r| <= tol |r|, max m <= r + tol, min m >= r - tol."""
    check: str
    params: dict
    measured: float
    reference: float
    tol: float
    kind: str = "abs"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown entry kind {self.kind!r}")

    @property
    def passed(self) -> bool:
        m, r, tol = float(self.measured), float(self.reference), float(self.tol)
        if math.isnan(m):
            return False
        if self.kind == "abs":
            return m == r or abs(m - r) <= tol
        if self.kind == "rel":
            return m == r or abs(m - r) <= tol * abs(r)
        if self.kind == "max":
            return m <= r + tol
        return m >= r - tol

    @property
    def param_json(self) -> str:
        return json.dumps(_jsonable({**self.params, "kind": self.kind}), sort_keys=True,
                          separators=(",", ":"))

    def row(self):
        return [self.check, self.param_json, fmt(self.measured), fmt(self.reference),
                fmt(self.tol), "true" if self.passed else "false"]


@dataclass
class Report:
    entries: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, check, measured, reference, tol, kind="abs", **params) -> Entry:
        e = Entry(check, params, measured, reference, tol, kind)
        self.entries.append(e)
        return e

    def extend(self, other: "Report"):
        self.entries.extend(other.entries)
        for k, v in other.metadata.items():
            self.metadata.setdefault(k, v)
        return self

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self):
        return [e for e in self.entries if not e.passed]

    def sorted_entries(self):
        return sorted(self.entries, key=lambda e: (e.check, e.param_json))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for e in self.sorted_entries():
            w.writerow(e.row())
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def summary(self) -> str:
        bad = len(self.failures)
        return f"{len(self.entries) - bad}/{len(self.entries)} checks passed"
