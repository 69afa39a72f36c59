"""Deterministic report rendering: JSON, CSV, and aligned text tables.

Identical inputs must produce byte-identical JSON and CSV.  All floats pass
through a single 12-significant-digit rounding choke point before they reach
any serializer, JSON keys are sorted, and CSV rows keep construction order,
which is always (level, prime) or index order upstream.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import ProjectivePoint

SCHEMA_VERSION = 1


def round_sig(x: float) -> float:
    # the + 0.0 turns -0.0 into 0.0 so reports never print "-0"
    return float(format(x, ".12g")) + 0.0


def _native(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def round_floats(obj):
    """Recursively coerce numpy scalars and round floats to 12 digits."""
    obj = _native(obj)
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


@dataclass
class Report:
    """One command's result: a JSON payload plus its tabular projection."""

    kind: str
    payload: dict
    columns: list[str]
    rows: list[list]
    title: str = ""
    notes: list[str] = field(default_factory=list)


def render_json(report: Report) -> str:
    body = {"schema_version": SCHEMA_VERSION, "kind": report.kind}
    body.update(report.payload)
    if report.notes:
        body["notes"] = list(report.notes)
    return json.dumps(round_floats(body), sort_keys=True, indent=2) + "\n"


def _cell(value) -> str:
    value = _native(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(round_sig(value), ".12g")
    return str(value)


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    buf.write(f"# towerlab schema_version={SCHEMA_VERSION} kind={report.kind}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _is_numeric(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def render_table(report: Report) -> str:
    cells = [[_cell(v) for v in row] for row in report.rows]
    widths = [len(c) for c in report.columns]
    for row in cells:
        for i, c in enumerate(row):
            widths[i] = max(widths[i], len(c))
    lines = []
    if report.title:
        lines.append(report.title)
    lines.append("  ".join(c.ljust(w) for c, w in zip(report.columns, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    # a column is right-aligned only if every filled cell in it is numeric
    numeric = [
        any(row[i] for row in cells)
        and all(_is_numeric(row[i]) for row in cells if row[i])
        for i in range(len(report.columns))
    ]
    for row in cells:
        parts = [
            c.rjust(w) if numeric[i] else c.ljust(w)
            for i, (c, w) in enumerate(zip(row, widths))
        ]
        lines.append("  ".join(parts).rstrip())
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "table":
        return render_table(report)
    raise ValueError(f"unknown format {fmt!r}")


def p1_label(point: ProjectivePoint) -> str:
    """Affine label for a point of P^1(Q): 'a/b' in lowest terms, or the
    infinity symbol."""
    a, b = point.coords
    if b == 0:
        return "∞"
    return str(Fraction(a, b))
