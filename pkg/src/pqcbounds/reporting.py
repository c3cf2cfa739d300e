"""CSV and JSON report files with embedded run metadata.

CSV files start with one ``# pqcbounds-meta: {...}`` comment line holding the
metadata as compact JSON, followed by a header row and data rows. JSON files
hold ``{"meta": {...}, "rows": [...]}`` with the same field names as the CSV
columns. Floats are written with ``repr`` so that values round-trip exactly;
NaN becomes an empty CSV cell and ``null`` in JSON.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__

__all__ = ["META_PREFIX", "make_metadata", "format_csv", "format_json", "render", "render_document", "read_report"]

META_PREFIX = "# pqcbounds-meta: "
FORMATS = ("csv", "json")


def make_metadata(command: str, argv: Sequence[str], config: dict, seed: int | None) -> dict:
    """Metadata block: tool version, command, replayable argv, resolved config and seed."""
    return {
        "tool": "pqcbounds",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "config": config,
    }


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else repr(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def format_csv(rows: Iterable[dict], columns: Sequence[str], meta: dict) -> str:
    buf = io.StringIO()
    buf.write(META_PREFIX + json.dumps(_json_value(meta), sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def format_json(rows: Iterable[dict], columns: Sequence[str], meta: dict) -> str:
    body = {"meta": meta, "rows": [{c: r[c] for c in columns} for r in rows]}
    return json.dumps(_json_value(body), indent=1, sort_keys=False) + "\n"


def render(rows: Iterable[dict], columns: Sequence[str], meta: dict, fmt: str) -> str:
    if fmt == "csv":
        return format_csv(rows, columns, meta)
    if fmt == "json":
        return format_json(rows, columns, meta)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def read_report(path: str | Path) -> tuple[dict, list[dict]]:
    """Parse a report written by :func:`render`; returns ``(meta, rows)``.

    CSV cells come back as strings.
    """
    text = Path(path).read_text()
    if text.startswith(META_PREFIX):
        first, _, rest = text.partition("\n")
        meta = json.loads(first[len(META_PREFIX):])
        rows = list(csv.DictReader(io.StringIO(rest)))
        return meta, rows
    data = json.loads(text)
    if not isinstance(data, dict) or "meta" not in data:
        raise ValueError(f"{path}: not a pqcbounds report")
    return data["meta"], data.get("rows", [])


def render_document(meta: dict, payload: dict) -> str:
    """JSON file ``{"meta": ..., "report": ...}`` for results that are not tables."""
    return json.dumps(_json_value({"meta": meta, "report": payload}), indent=1) + "\n"
