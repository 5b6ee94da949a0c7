"""Space-independent geodesic bookkeeping.

A *space* is any object implementing the small duck-typed surface used
below (``enumerate_joining``, ``count_curve``, ``passage_params``,
``restrict``, ``same_point``, ``segment_start``, ``segment_end``,
``injectivity_radius_value``).  Flat tori, the genus-2 surface and
products all provide it, so the trim/split maps and the three counters
are written once here.

Segment parameters are normalised to ``s in [0, 1]``; arclength is
``s * length``.  On exact spaces ``s`` is a :class:`fractions.Fraction`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence


class SpaceMismatchError(ValueError):
    """Raised when a segment and a point live on different spaces."""


class UnsupportedSpaceError(TypeError):
    pass


@dataclass(frozen=True)
class Configuration:
    """Ordered pair of points on one space; ``x == y`` is allowed."""

    x: Any
    y: Any

    def swapped(self) -> "Configuration":
        return Configuration(self.y, self.x)


@dataclass(frozen=True)
class GeodesicSegment:
    """A geodesic segment given by its lift to the universal cover.

    ``lift_start`` is always the canonical lift of the start point;
    ``lift_end`` is the lift reached by following the segment.  For tori
    the lifts are tuples of Fractions in the basis frame, for the
    hyperbolic surface they are hyperboloid vectors.  ``length_sq`` is
    exact when the space is.
    """

    space: Any = field(repr=False, compare=False)
    lift_start: tuple
    lift_end: tuple
    length_sq: Any
    word: str = ""

    def __post_init__(self):
        if not self.length_sq > 0:
            raise ValueError("geodesic segments have positive length")

    @property
    def length(self) -> float:
        return math.sqrt(self.length_sq)

    @property
    def domain(self) -> tuple[float, float]:
        return (0.0, self.length)

    @property
    def start(self):
        return self.space.segment_start(self)

    @property
    def end(self):
        return self.space.segment_end(self)

    def key(self):
        return self.space.segment_key(self)


@dataclass(frozen=True)
class PassageRecord:
    """Interior passages of one segment through one point.

    ``params`` are normalised parameters in (0, 1); ``times`` are the
    corresponding arclengths.
    """

    point: Any
    params: tuple
    times: tuple

    def __bool__(self) -> bool:
        return bool(self.params)


@dataclass
class CountCurve:
    config: Configuration
    grid: list
    n: list
    m: list
    space: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.grid) == len(self.n) == len(self.m)):
            raise ValueError("grid, n and m must have equal length")
        if any(b < a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be increasing")
        if any(mi > ni for mi, ni in zip(self.m, self.n)):
            raise ValueError("m_T exceeds n_T")

    def rows(self):
        return list(zip(self.grid, self.n, self.m))


def _check_same_space(g: GeodesicSegment, space) -> None:
    if g.space is not space and g.space != space:
        raise SpaceMismatchError("segment and point belong to different spaces")


def passage_times(g: GeodesicSegment, z, space=None) -> PassageRecord:
    """Interior parameters where ``g`` passes through ``z``.

    ``space`` may be given to assert that ``z`` was made on the same space
    as ``g``.
    """
    if space is not None:
        _check_same_space(g, space)
    sp = g.space
    z = sp.point(z)
    params = tuple(sp.passage_params(g, z))
    L = g.length
    return PassageRecord(z, params, tuple(float(s) * L for s in params))


def _first_at(g: GeodesicSegment, point) -> Any:
    sp = g.space
    ps = sp.passage_params(g, point)
    return ps[0] if ps else None


def trim_to_connecting(g: GeodesicSegment) -> GeodesicSegment:
    """Restrict a joining segment to its first connecting subsegment.

    ``b'`` is the first time the segment reaches its endpoint ``y`` and
    ``a'`` the last time before ``b'`` that it sits at ``x``.  Identity on
    connecting segments.
    """
    sp = g.space
    x, y = sp.segment_start(g), sp.segment_end(g)
    one = sp.one
    hits_y = sp.passage_params(g, y)
    b = hits_y[0] if hits_y else one
    eps = getattr(sp, "param_eps", 0)
    hits_x = [s for s in sp.passage_params(g, x) if s < b - eps]
    a = hits_x[-1] if hits_x else sp.zero
    if a == sp.zero and b == one:
        return g
    return sp.restrict(g, a, b)


def split_at_blocker(g: GeodesicSegment, z, T) -> GeodesicSegment:
    """The injective split map used for blocked connecting segments.

    Returns the piece from the start to the first passage through ``z``
    when its length is at most ``T/2`` (ties included), otherwise the
    piece from the last passage through ``z`` to the end.
    """
    sp = g.space
    z = sp.point(z)
    x, y = sp.segment_start(g), sp.segment_end(g)
    if sp.same_point(z, x) or sp.same_point(z, y):
        raise ValueError("split point coincides with an endpoint")
    hits = sp.passage_params(g, z)
    if not hits:
        raise ValueError("segment does not pass through the split point")
    if not sp.length_le(g.length_sq, T):
        raise ValueError("segment longer than T")
    first, last = hits[0], hits[-1]
    # length(gamma_1) = first * L  <=  T/2   <=>   first^2 L^2 <= T^2 / 4
    if sp.scaled_length_le(g.length_sq, first, T, half=True):
        return sp.restrict(g, sp.zero, first)
    return sp.restrict(g, last, sp.one)


def _require_positive(T) -> None:
    if not T > 0:
        raise ValueError("T must be positive")


def count_joining(space, cfg: Configuration, T) -> int:
    """n_T(x, y): joining geodesics of length at most T."""
    _require_positive(T)
    if not hasattr(space, "count_curve"):
        raise UnsupportedSpaceError(type(space).__name__)
    n, _ = space.count_curve(cfg, [T])
    return int(n[0])


def count_connecting(space, cfg: Configuration, T) -> int:
    """m_T(x, y): joining geodesics with no interior visit to x or y."""
    _require_positive(T)
    if not hasattr(space, "count_curve"):
        raise UnsupportedSpaceError(type(space).__name__)
    _, m = space.count_curve(cfg, [T])
    return int(m[0])


def connecting_segments(space, cfg: Configuration, T) -> list[GeodesicSegment]:
    """Gamma_T(x, y) as explicit segments, in the space's canonical order."""
    _require_positive(T)
    if hasattr(space, "enumerate_connecting"):
        return space.enumerate_connecting(cfg, T)
    x, y = space.point(cfg.x), space.point(cfg.y)
    out = []
    for g in space.enumerate_joining(cfg, T):
        if not space.passage_params(g, x) and not space.passage_params(g, y):
            out.append(g)
    return out


def through_segments(space, cfg: Configuration, z, T) -> list[GeodesicSegment]:
    """Gamma_T(x, y; z): connecting segments passing through ``z``."""
    z = space.point(z)
    if space.same_point(z, space.point(cfg.x)) or space.same_point(z, space.point(cfg.y)):
        raise ValueError("z must differ from both configuration points")
    return [g for g in connecting_segments(space, cfg, T) if space.passage_params(g, z)]


def count_through(space, cfg: Configuration, z, T) -> int:
    """m_T(x, y; z)."""
    _require_positive(T)
    return len(through_segments(space, cfg, z, T))


def count_curve(space, cfg: Configuration, grid: Sequence) -> CountCurve:
    grid = sorted(grid)
    for T in grid:
        _require_positive(T)
    n, m = space.count_curve(cfg, grid)
    return CountCurve(cfg, list(grid), [int(v) for v in n], [int(v) for v in m],
                      space=space.describe().get("type", ""))


ZERO = Fraction(0)
ONE = Fraction(1)
