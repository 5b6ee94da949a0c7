"""Riemannian products of two supported spaces.

A product geodesic is a pair of component geodesics run at constant
speed over the same parameter interval; one component may be constant
when its endpoints agree.  Squared lengths add.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .core import Configuration

_FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class ConstantPoint:
    """Marker for a constant component; keeps GeodesicSegment lengths positive."""

    point: Any

    length_sq = 0
    length = 0.0


@dataclass(frozen=True)
class ProductGeodesic:
    space: Any = field(repr=False, compare=False)
    left_part: Any
    right_part: Any
    length_sq: Any

    def __post_init__(self):
        if isinstance(self.left_part, ConstantPoint) and isinstance(self.right_part, ConstantPoint):
            raise ValueError("a product geodesic needs a moving component")
        if not self.length_sq > 0:
            raise ValueError("product geodesics have positive length")

    @property
    def length(self) -> float:
        return math.sqrt(self.length_sq)

    @property
    def start(self):
        return self.space.segment_start(self)

    @property
    def end(self):
        return self.space.segment_end(self)

    def key(self):
        return self.space.segment_key(self)


class ProductSpace:
    def __init__(self, left, right):
        self.left = left
        self.right = right
        self.exact = bool(getattr(left, "exact", False) and getattr(right, "exact", False))
        self.zero = Fraction(0) if self.exact else 0.0
        self.one = Fraction(1) if self.exact else 1.0
        # component segments recur across many product pairs
        self._cache: dict = {}

    @property
    def param_eps(self):
        if self.exact:
            return 0
        return max(getattr(self.left, "param_eps", 0), getattr(self.right, "param_eps", 0), _FLOAT_TOL)

    def __repr__(self):
        return f"ProductSpace({self.left!r}, {self.right!r})"

    def __eq__(self, other):
        return isinstance(other, ProductSpace) and (self.left, self.right) == (other.left, other.right)

    def __hash__(self):
        return hash((self.left, self.right))

    def describe(self) -> dict:
        return {"type": "product", "product": [self.left.describe(), self.right.describe()]}

    @property
    def volume(self) -> float:
        return self.left.volume * self.right.volume

    # -- points -------------------------------------------------------------
    def point(self, p):
        if isinstance(p, str):
            if "|" not in p:
                raise ValueError("product points are written 'left|right'")
            p = tuple(p.split("|", 1))
        if len(p) != 2:
            raise ValueError("product point needs two components")
        return (self.left.point(p[0]), self.right.point(p[1]))

    def same_point(self, p, q) -> bool:
        p, q = self.point(p), self.point(q)
        return self.left.same_point(p[0], q[0]) and self.right.same_point(p[1], q[1])

    def sample_point(self, rng):
        return (self.left.sample_point(rng), self.right.sample_point(rng))

    def injectivity_radius_value(self) -> float:
        return min(self.left.injectivity_radius_value(), self.right.injectivity_radius_value())

    # -- enumeration --------------------------------------------------------
    def _component(self, space, x, y, T):
        segs = space.enumerate_joining(Configuration(x, y), T)
        if space.same_point(x, y):
            segs = [ConstantPoint(space.point(x))] + segs
        return segs

    def enumerate_product(self, cfg: Configuration, T) -> list[ProductGeodesic]:
        """All product geodesics from xi to eta with length <= T.

        Sorted by squared length, then by the component enumeration order.
        """
        (xl, xr), (yl, yr) = self.point(cfg.x), self.point(cfg.y)
        left = self._component(self.left, xl, yl, T)
        right = self._component(self.right, xr, yr, T)
        T2 = _square(T, self.exact)
        rlen = [g.length_sq for g in right]
        out = []
        for i, a in enumerate(left):
            budget = T2 - a.length_sq
            if budget < 0:
                continue
            # right lists are sorted by squared length
            hi = bisect.bisect_right(rlen, budget + (0 if self.exact else _FLOAT_TOL))
            for j in range(hi):
                b = right[j]
                if isinstance(a, ConstantPoint) and isinstance(b, ConstantPoint):
                    continue
                out.append((a.length_sq + b.length_sq, i, j, a, b))
        out.sort(key=lambda r: (r[0], r[1], r[2]))
        return [ProductGeodesic(self, a, b, L2) for L2, _, _, a, b in out]

    enumerate_joining = enumerate_product

    def count_curve(self, cfg: Configuration, grid: Sequence):
        xi, eta = self.point(cfg.x), self.point(cfg.y)
        segs = self.enumerate_product(cfg, max(grid))
        conn = [not self.passage_params(g, xi) and not self.passage_params(g, eta) for g in segs]
        n, m = [], []
        for T in grid:
            T2 = _square(T, self.exact)
            inside = [g.length_sq <= T2 for g in segs]
            n.append(sum(inside))
            m.append(sum(1 for a, c in zip(inside, conn) if a and c))
        return n, m

    # -- segment protocol ---------------------------------------------------
    def _part_start(self, space, part):
        return part.point if isinstance(part, ConstantPoint) else space.segment_start(part)

    def _part_end(self, space, part):
        return part.point if isinstance(part, ConstantPoint) else space.segment_end(part)

    def segment_start(self, g: ProductGeodesic):
        return (self._part_start(self.left, g.left_part), self._part_start(self.right, g.right_part))

    def segment_end(self, g: ProductGeodesic):
        return (self._part_end(self.left, g.left_part), self._part_end(self.right, g.right_part))

    def segment_key(self, g: ProductGeodesic):
        def k(space, part):
            return ("const", part.point) if isinstance(part, ConstantPoint) else space.segment_key(part)
        return (k(self.left, g.left_part), k(self.right, g.right_part))

    def segment_label(self, g: ProductGeodesic) -> str:
        def lab(space, part):
            if isinstance(part, ConstantPoint):
                return "const"
            if hasattr(space, "displacement"):
                return ",".join(str(c) for c in space.displacement(part))
            return space.segment_label(part)
        return f"{lab(self.left, g.left_part)}|{lab(self.right, g.right_part)}"

    def _part_params(self, space, part, z):
        """Interior parameters of one component at ``z``; None means 'always'."""
        if isinstance(part, ConstantPoint):
            return None if space.same_point(part.point, z) else []
        key = (id(space), part, z)
        hit = self._cache.get(key)
        if hit is None:
            if len(self._cache) > 200_000:
                self._cache.clear()
            hit = self._cache[key] = space.passage_params(part, z)
        return hit

    def passage_params(self, g: ProductGeodesic, z) -> list:
        zl, zr = self.point(z)
        a = self._part_params(self.left, g.left_part, zl)
        b = self._part_params(self.right, g.right_part, zr)
        if a is None:
            return list(b)
        if b is None:
            return list(a)
        if self.exact:
            return sorted(set(a) & set(b))
        eps = max(getattr(self.left, "param_eps", 0), getattr(self.right, "param_eps", 0), _FLOAT_TOL)
        return [s for s in a if any(abs(s - t) < eps for t in b)]

    def restrict(self, g: ProductGeodesic, a, b) -> ProductGeodesic:
        def part(space, p):
            if isinstance(p, ConstantPoint):
                return p
            return space.restrict(p, a, b)
        lp, rp = part(self.left, g.left_part), part(self.right, g.right_part)
        return ProductGeodesic(self, lp, rp, lp.length_sq + rp.length_sq)

    def length_le(self, length_sq, T) -> bool:
        return length_sq <= _square(T, self.exact) * (1 if self.exact else 1 + 1e-12)

    def scaled_length_le(self, length_sq, s, T, half: bool = False) -> bool:
        if self.exact:
            T = Fraction(T) if not isinstance(T, float) else Fraction(repr(T))
            T = T / 2 if half else T
            return Fraction(s) ** 2 * length_sq <= T * T
        T = float(T) / (2 if half else 1)
        return float(s) ** 2 * float(length_sq) <= T * T * (1 + 1e-12)

    # -- blocking -----------------------------------------------------------
    def product_blocking_set(self, cfg: Configuration, B_left: Sequence, B_right: Sequence) -> list:
        """Blocking candidates for the product from component blocking sets.

        Pairs ``B_left x B_right`` block geodesics moving in both factors;
        when a factor's endpoints coincide, the other factor's blockers are
        paired with that point to catch geodesics constant in that factor.
        """
        (xl, xr), (yl, yr) = self.point(cfg.x), self.point(cfg.y)
        Bl = [self.left.point(b) for b in B_left]
        Br = [self.right.point(b) for b in B_right]
        for b in Bl:
            if self.left.same_point(b, xl) or self.left.same_point(b, yl):
                raise ValueError("left blockers must avoid the configuration points")
        for b in Br:
            if self.right.same_point(b, xr) or self.right.same_point(b, yr):
                raise ValueError("right blockers must avoid the configuration points")
        out = [(a, b) for a in Bl for b in Br]
        if self.left.same_point(xl, yl):
            out += [(xl, b) for b in Br]
        if self.right.same_point(xr, yr):
            out += [(a, xr) for a in Bl]
        return out


def _square(T, exact: bool):
    if exact:
        from .flat_torus import as_fraction
        T = as_fraction(T)
        return T * T
    return float(T) ** 2


def product_space(left, right) -> ProductSpace:
    return ProductSpace(left, right)


def enumerate_product(p: ProductSpace, cfg: Configuration, T) -> list[ProductGeodesic]:
    return p.enumerate_product(cfg, T)


def product_blocking_set(p: ProductSpace, cfg: Configuration, B_left, B_right) -> list:
    return p.product_blocking_set(cfg, B_left, B_right)
