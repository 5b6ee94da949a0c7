"""Deterministic CSV / JSON output and run manifests."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import Configuration, CountCurve

CURVE_HEADER = ("T", "n_T", "m_T")


def render_number(v) -> str:
    """Rationals as p/q, integers plainly, floats by repr."""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v.is_integer() and abs(v) < 2**53:
            return str(int(v))
        return repr(v)
    return str(v)


def _jsonable(obj):
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else int(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, Configuration):
        return {"x": str(obj.x), "y": str(obj.y)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def curve_to_csv(curve: CountCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for T, n, m in sorted(curve.rows(), key=lambda r: r[0]):
        w.writerow([render_number(T), int(n), int(m)])
    return buf.getvalue()


def read_curve_csv(path) -> CountCurve:
    """Read a ``T,n_T,m_T`` file; T values become Fractions."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CURVE_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CURVE_HEADER)}")
    grid, n, m = [], [], []
    for r in rows[1:]:
        if not r:
            continue
        grid.append(Fraction(r[0]))
        n.append(int(r[1]))
        m.append(int(r[2]))
    return CountCurve(Configuration("", ""), grid, n, m)


def to_json(result, context: dict | None = None) -> str:
    data = _jsonable(result)
    if context:
        if not isinstance(data, dict):
            data = {"result": data}
        data = {**_jsonable(context), **data}
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def write_report(result, path, context: dict | None = None) -> Path:
    """Write ``result`` to ``path`` as CSV (count curves) or JSON (everything else).

    ``context`` (space description, hash, configuration) is merged into
    JSON outputs so certificates stand alone.
    """
    path = Path(path)
    if isinstance(result, CountCurve) and path.suffix.lower() != ".json":
        text = curve_to_csv(result)
    else:
        text = to_json(result, context)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def write_manifest(out, argv, space_desc, seed, tolerances, wall_time) -> Path:
    """Sidecar manifest next to ``out``; kept separate so ``out`` stays byte-stable."""
    from . import __version__
    data = {
        "output": Path(out).name,
        "command": list(argv),
        "space": space_desc,
        "seed": seed,
        "tolerances": tolerances,
        "version": __version__,
        "python": sys.version.split()[0],
        "wall_time_s": round(wall_time, 6),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    p = manifest_path(out)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n")
    return p
