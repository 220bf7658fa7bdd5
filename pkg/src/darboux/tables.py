"""Deterministic tabular output: CSV and JSON with fixed float formatting.

Identical inputs must produce identical bytes, so floats are written with
fixed significant digits (9 for CSV, 17 for JSON; the latter round-trips
float64 exactly) and metadata keys are emitted sorted.  Flagged rows are
annotated with a pole column, never dropped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["OutputTable", "format_csv", "format_json", "parse_json", "write_table"]

CSV_DIGITS = 9
JSON_DIGITS = 17


@dataclass
class OutputTable:
    """Column-oriented numeric table with units in the headers."""

    name: str
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _fmt(x, digits: int) -> str:
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return x
    return f"{float(x):.{digits}g}"


def _meta_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.{JSON_DIGITS}g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_meta_value(x) for x in v) + "]"
    return str(v)


def format_csv(table: OutputTable) -> str:
    lines = [f"# table: {table.name}"]
    for key in sorted(table.metadata):
        lines.append(f"# {key}: {_meta_value(table.metadata[key])}")
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_fmt(x, CSV_DIGITS) for x in row))
    return "\n".join(lines) + "\n"


def _json_scalar(v) -> str:
    # floats at 17 significant digits round-trip float64 exactly
    if hasattr(v, "item") and not isinstance(v, (list, tuple, dict)):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.{JSON_DIGITS}g}" if v == v and abs(v) != float("inf") else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if v is None:
        return "null"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_scalar(x) for x in v) + "]"
    if isinstance(v, dict):
        items = (f"{json.dumps(str(k))}: {_json_scalar(v[k])}" for k in sorted(v))
        return "{" + ", ".join(items) + "}"
    return json.dumps(str(v))


def format_json(table: OutputTable) -> str:
    lines = ["{"]
    lines.append(f'  "name": {json.dumps(table.name)},')
    lines.append(f'  "columns": {_json_scalar(list(table.columns))},')
    lines.append(f'  "metadata": {_json_scalar(table.metadata)},')
    lines.append('  "rows": [')
    for i, row in enumerate(table.rows):
        tail = "," if i + 1 < len(table.rows) else ""
        lines.append("    " + _json_scalar(list(row)) + tail)
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_json(text: str) -> OutputTable:
    data = json.loads(text)
    return OutputTable(name=data["name"], columns=data["columns"],
                       rows=data["rows"], metadata=data.get("metadata", {}))


def write_table(table: OutputTable, path, fmt: str) -> None:
    if fmt == "csv":
        payload = format_csv(table)
    elif fmt == "json":
        payload = format_json(table)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
