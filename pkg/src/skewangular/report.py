"""Structured run reports emitted by the command-line tool."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = "1"
REPORT_KEYS = ("command", "spec", "inputs", "results", "schema_version")


def plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays and tuples to JSON-ready builtins.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``
    so the document stays strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


@dataclass
class RunReport:
    command: str
    spec: str | None
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return plain({k: getattr(self, k) for k in REPORT_KEYS})

    def to_json(self) -> str:
        # repr-based float output is the shortest string that round-trips
        # exactly, so identical runs give identical bytes
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        validate_report(data)
        return cls(**{k: data[k] for k in REPORT_KEYS})

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))

    def to_pretty(self) -> str:
        lines = [f"{self.command}  [{self.spec}]  (schema {self.schema_version})"]
        _pretty_lines(self.to_dict()["inputs"], "inputs", lines)
        _pretty_lines(self.to_dict()["results"], "results", lines)
        return "\n".join(lines) + "\n"


def _pretty_lines(obj: Any, prefix: str, out: list[str]) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _pretty_lines(obj[k], f"{prefix}.{k}", out)
    elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
        for i, item in enumerate(obj):
            label = item.get("name", i) if isinstance(item, dict) else i
            _pretty_lines(item, f"{prefix}[{label}]", out)
    elif isinstance(obj, float):
        out.append(f"{prefix} = {obj:.12g}")
    else:
        out.append(f"{prefix} = {obj}")


class ReportSchemaError(ValueError):
    pass


def validate_report(data: Any) -> None:
    """Check the top-level report layout."""
    if not isinstance(data, dict):
        raise ReportSchemaError("report must be a JSON object")
    missing = [k for k in REPORT_KEYS if k not in data]
    if missing:
        raise ReportSchemaError(f"report is missing keys {missing}")
    extra = sorted(set(data) - set(REPORT_KEYS))
    if extra:
        raise ReportSchemaError(f"unexpected report keys {extra}")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ReportSchemaError(f"unsupported schema_version {data['schema_version']!r}")
    if data["command"] not in ("eval", "check", "detect", "sharpness"):
        raise ReportSchemaError(f"unknown command {data['command']!r}")
    if not isinstance(data["inputs"], dict) or not isinstance(data["results"], dict):
        raise ReportSchemaError("inputs and results must be objects")
    if data["spec"] is not None and not isinstance(data["spec"], str):
        raise ReportSchemaError("spec must be a string or null")


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()
