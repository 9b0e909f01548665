"""Run records and their serialization.

Records are written one JSON object per line with sorted keys. Floats are
written with 17 significant digits; non-finite floats become the strings
``"inf"``, ``"-inf"`` and ``"nan"``. Wall-clock time is kept out of records
(it appears in text output only) so that a rerun is byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..rng import RNG_ALGORITHM


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return format(v, ".17g")


def to_json(obj) -> str:
    """Deterministic compact JSON with 17-significant-digit floats."""
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + to_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


@dataclass
class RunRecord:
    command: str
    config: dict
    results: dict
    status: str = "ok"
    reason: str | None = None
    point: dict | None = None
    # seconds for the whole command; shown in text output, never serialized
    wall_clock: float = field(default=0.0, compare=False)

    def as_dict(self) -> dict:
        d = {"command": self.command, "config": self.config, "results": self.results,
             "status": self.status, "version": __version__, "rng": RNG_ALGORITHM}
        if self.reason is not None:
            d["reason"] = self.reason
        if self.point is not None:
            d["point"] = self.point
        return d

    def to_line(self) -> str:
        return to_json(self.as_dict())


def records_text(records) -> str:
    return "".join(r.to_line() + "\n" for r in records)


def csv_text(columns, rows) -> str:
    """CSV with a header row and columns in the given fixed order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v)).strip('"')
    return str(v)


def flatten(d: dict, prefix: str = "") -> dict:
    """Nested dict to ``a.b`` keys, for single-record CSV output."""
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        elif isinstance(v, (list, tuple, np.ndarray)):
            out[key] = " ".join(_cell(x) for x in np.asarray(v).ravel().tolist())
        else:
            out[key] = v
    return out
