"""Row rendering for the CLI: CSV with one header row, or JSON lines.

Floats use the shortest representation that round-trips; missing values are
empty CSV cells and JSON ``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping, Sequence


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return ""
        return repr(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):
        return value.item()
    return value


def render_csv(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(_json_value(row.get(c))) for c in columns])
    return buf.getvalue()


def render_jsonl(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    lines = [json.dumps({c: _json_value(row.get(c)) for c in columns}, ensure_ascii=False)
             for row in rows]
    return "".join(line + "\n" for line in lines)


def render(rows: Sequence[Mapping[str, Any]], columns: Sequence[str], as_json: bool) -> str:
    return render_jsonl(rows, columns) if as_json else render_csv(rows, columns)


def parse_csv(text: str) -> list[dict[str, Any]]:
    """Inverse of :func:`render_csv` for numeric and text cells."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed: dict[str, Any] = {}
        for key, cell in row.items():
            parsed[key] = _parse_cell(cell)
        out.append(parsed)
    return out


def _parse_cell(cell: str) -> Any:
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell
