"""Space descriptions (JSON) and point parsing."""
from __future__ import annotations

import cmath
import hashlib
import json
import math
from fractions import Fraction

from .flat_torus import LatticeTorus, as_fraction
from .hyperbolic import CIRCUMRADIUS, INRADIUS, FuchsianSurface, HypPoint
from .product import ProductSpace


class SpaceFormatError(ValueError):
    pass


def _disk_radius(r: float) -> float:
    return math.tanh(r / 2)


def hyperbolic_anchors() -> dict[str, complex]:
    """Named disk points: centre, octagon vertices, side midpoints, generic points."""
    a = {"c0": 0j}
    for k in range(8):
        a[f"m{k}"] = cmath.rect(_disk_radius(INRADIUS), k * math.pi / 4)
        a[f"v{k}"] = cmath.rect(_disk_radius(CIRCUMRADIUS), (k + 0.5) * math.pi / 4)
    # fixed interior points in general position
    for k in range(1, 9):
        a[f"c{k}"] = cmath.rect(_disk_radius(0.25 + 0.1 * k), 0.9 * k + 0.2)
    return a


_ANCHORS = hyperbolic_anchors()


def parse_hyperbolic_point(space: FuchsianSurface, text: str) -> HypPoint:
    text = text.strip()
    if text in _ANCHORS:
        return space.point(_ANCHORS[text])
    parts = text.split(",")
    if len(parts) != 2:
        raise SpaceFormatError(f"unknown hyperbolic point {text!r}; use an anchor or 're,im'")
    try:
        w = complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise SpaceFormatError(f"bad disk coordinates {text!r}") from exc
    return space.point(w)


def space_from_json(desc):
    """Build a space from its JSON description (dict, string or file path)."""
    if isinstance(desc, str):
        s = desc.strip()
        if s in ("genus2", "torus", "circle") or s.startswith("torus:"):
            return _named(s)
        if s.startswith("{"):
            desc = json.loads(s)
        else:
            with open(s, encoding="utf-8") as fh:
                desc = json.load(fh)
    if not isinstance(desc, dict):
        raise SpaceFormatError("space description must be a JSON object")
    if "product" in desc:
        parts = desc["product"]
        if not isinstance(parts, list) or len(parts) != 2:
            raise SpaceFormatError("product needs exactly two component spaces")
        return ProductSpace(space_from_json(parts[0]), space_from_json(parts[1]))
    kind = desc.get("type")
    if kind == "torus":
        basis = desc.get("basis")
        if basis is None:
            return LatticeTorus([[int(i == j) for j in range(desc.get("dim", 2))]
                                 for i in range(desc.get("dim", 2))])
        try:
            return LatticeTorus.from_columns([[as_fraction(v) for v in col] for col in basis])
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise SpaceFormatError(f"bad torus basis: {exc}") from exc
    if kind == "genus2":
        return FuchsianSurface(tol=float(desc.get("tolerance", 1e-9)))
    raise SpaceFormatError(f"unknown space type {kind!r}")


def _named(s: str):
    if s == "genus2":
        return FuchsianSurface()
    if s == "circle":
        return LatticeTorus([[1]])
    dim = int(s.split(":", 1)[1]) if ":" in s else 2
    return LatticeTorus([[int(i == j) for j in range(dim)] for i in range(dim)])


def space_hash(space) -> str:
    blob = json.dumps(space.describe(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def format_point(p) -> str:
    if isinstance(p, tuple):
        return "|".join(format_point(q) for q in p)
    return str(p)


def fraction_str(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(v)
