"""Plain-text table output: '#'-prefixed metadata header, then CSV rows.

Floats are written with repr (shortest round-trip form), so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

__all__ = ["format_value", "write_table", "write_json", "read_table"]

FORMAT_NAME = "hazseg-table"
FORMAT_VERSION = 1


def format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _meta_lines(meta: dict) -> list[str]:
    lines = [f"# {FORMAT_NAME} v{FORMAT_VERSION}"]
    for key in sorted(meta):
        lines.append(f"# {key}: {format_value(meta[key])}")
    return lines


def write_table(path, columns: dict, meta: dict) -> None:
    """Write named columns (equal-length sequences) with a metadata header."""
    names = list(columns)
    series = [list(columns[name]) for name in names]
    length = len(series[0]) if series else 0
    if any(len(s) != length for s in series):
        raise ValueError("columns must have equal lengths")
    lines = _meta_lines(meta)
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(format_value(s[i]) for s in series))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path, record: dict, meta: dict) -> None:
    payload = {"meta": dict(sorted(meta.items())), **record}
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def read_table(path) -> tuple[dict, dict]:
    """Read back a table written by write_table: (columns, metadata)."""
    meta: dict = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                meta[key.strip()] = value.strip()
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: no header row")
    columns = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in rows]
        try:
            columns[name] = [float(v) for v in raw]
        except ValueError:
            columns[name] = raw
    return columns, meta
