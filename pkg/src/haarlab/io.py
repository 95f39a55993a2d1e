"""Text formats for Haar expansions and rearrangements, and report writers.

Haar expansion file::

    space <r> <m> <depth>
    <level>:<pos> <v1> ... <vm>

Rearrangement file::

    depth <N>
    <level>:<pos> -> <level>:<pos>
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from haarlab.dyadic import Interval, IntervalCollection
from haarlab.haar import HaarVector, NormedSpace
from haarlab.rational import DyadicRational, format_exact
from haarlab.rearrange import Rearrangement


def dumps_haar(f: HaarVector, depth: int | None = None) -> str:
    depth = depth if depth is not None else (f.depth if f.depth is not None else max(f.max_level, 0))
    r = "inf" if math.isinf(f.space.r) else repr(f.space.r)
    lines = [f"space {r} {f.space.m} {depth}"]
    for I, x in f.items():
        lines.append(f"{I} " + " ".join(repr(float(v)) for v in x))
    return "\n".join(lines) + "\n"


def loads_haar(text: str) -> HaarVector:
    header = None
    coeffs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "space" or len(parts) != 4:
                raise ValueError(f"line {lineno}: expected header 'space r m depth', got {raw!r}")
            header = (NormedSpace.parse(f"{parts[1]},{parts[2]}"), int(parts[3]))
            continue
        space = header[0]
        if len(parts) != space.m + 1:
            raise ValueError(f"line {lineno}: expected an interval and {space.m} values")
        coeffs.append((Interval.parse(parts[0]), [float(v) for v in parts[1:]]))
    if header is None:
        raise ValueError("empty Haar expansion file")
    return HaarVector(coeffs, header[0], header[1])


def read_haar(path) -> HaarVector:
    return loads_haar(Path(path).read_text())


def write_haar(path, f: HaarVector, depth: int | None = None) -> None:
    Path(path).write_text(dumps_haar(f, depth))


def read_tau(path) -> Rearrangement:
    return Rearrangement.loads(Path(path).read_text())


def write_tau(path, tau: Rearrangement) -> None:
    Path(path).write_text(tau.dumps())


def to_jsonable(obj):
    """Recursively convert report values; exact rationals become strings."""
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, (DyadicRational, Fraction)):
        return format_exact(obj)
    if isinstance(obj, (Interval,)):
        return str(obj)
    if isinstance(obj, IntervalCollection):
        return str(obj)
    if isinstance(obj, HaarVector):
        return {str(I): (float(x[0]) if obj.is_scalar else [float(v) for v in x]) for I, x in obj.items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=1) + "\n"


def dumps_csv(rows: list[dict]) -> str:
    rows = [to_jsonable(r) for r in rows]
    buf = io.StringIO()
    if not rows:
        return ""
    fields = sorted({k for r in rows for k in r})
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in r.items()})
    return buf.getvalue()
