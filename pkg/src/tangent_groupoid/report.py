"""Deterministic CSV output."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence


def format_value(v) -> str:
    """Shortest round-trip text for floats; plain ``str`` otherwise."""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return format_value(v.item())
    return str(v)


def render_csv(header: Sequence[str], rows: Iterable[Sequence], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_csv(rows: Iterable[Sequence], path, header: Sequence[str], comment: str | None = None) -> int:
    """Write ``rows`` under ``header`` to ``path``; returns the number of rows."""
    rows = list(rows)
    text = render_csv(header, rows, comment)
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    return len(rows)
