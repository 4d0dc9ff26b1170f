"""Small helpers shared by the serializers.

Text outputs start with a single ``# `` comment line holding the resolved
run configuration as compact JSON; every reader skips ``#`` lines.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

SCHEMA_VERSION = 1


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, NaN mapped to null)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalar
        return _clean(obj.item())
    return obj


def meta_line(meta: dict | None) -> str:
    if not meta:
        return ""
    return "# " + json.dumps(_clean(meta), sort_keys=True, separators=(",", ":")) + "\n"


def read_meta(path: str | Path) -> dict | None:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("# {"):
        return json.loads(first[2:])
    return None


def fmt_float(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(meta_line(meta))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
