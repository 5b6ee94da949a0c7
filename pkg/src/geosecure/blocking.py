"""Finite blocking checks and exhaustive minimal-blocking search."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Configuration, UnsupportedSpaceError, connecting_segments
from .flat_torus import LatticeTorus, TorusPoint, as_fraction, hit_table

SUBSET_CAP = 10**7
MAX_SEARCH_SIZE = 6


class BudgetExceededError(RuntimeError):
    pass


@dataclass
class BlockReport:
    config: Configuration
    blockers: tuple
    T: object
    hits: list
    blocked: bool

    def first_unblocked(self):
        for h in self.hits:
            if h["blocker"] is None:
                return h["segment"]
        return None

    @property
    def unblocked(self) -> list:
        return [h["segment"] for h in self.hits if h["blocker"] is None]

    def to_dict(self) -> dict:
        return {
            "config": {"x": str(self.config.x), "y": str(self.config.y)},
            "blockers": [str(b) for b in self.blockers],
            "T": str(self.T),
            "blocked": self.blocked,
            "segments": len(self.hits),
            "hits": [{"segment": h["segment"], "blocker": h["blocker"],
                      "param": None if h["param"] is None else str(h["param"])}
                     for h in self.hits],
        }


@dataclass
class ThresholdBound:
    """Bounds on the security threshold of one configuration.

    ``lower`` is grid-restricted: no subset of the candidate grid of size
    below it blocks Gamma_T.  Off-grid blocking sets are not excluded.
    """

    config: Configuration
    lower: int
    upper: int | None
    T: object
    grid: str
    subset: tuple | None = None
    certificate: object = None
    tested: int = 0
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def to_dict(self) -> dict:
        return {
            "config": {"x": str(self.config.x), "y": str(self.config.y)},
            "lower": self.lower,
            "lower_kind": "grid-restricted",
            "upper": self.upper,
            "T": str(self.T),
            "grid": self.grid,
            "subset": None if self.subset is None else [str(p) for p in self.subset],
            "subsets_tested": self.tested,
            "certificate_scope": None if self.certificate is None else self.certificate.scope,
        }


def _segment_label(space, g) -> str:
    if isinstance(space, LatticeTorus):
        return ",".join(str(c) for c in space.displacement(g))
    if hasattr(space, "segment_label"):
        return space.segment_label(g)
    return repr(space.segment_key(g))


def _check_disjoint(space, cfg: Configuration, B) -> tuple:
    x, y = space.point(cfg.x), space.point(cfg.y)
    B = tuple(space.point(b) for b in B)
    for b in B:
        if space.same_point(b, x) or space.same_point(b, y):
            raise ValueError(f"blocker {b} coincides with a configuration point")
    return x, y, B


def verify_blocking_finite(space, cfg: Configuration, B: Sequence, T) -> BlockReport:
    """Check that every segment of Gamma_T(x, y) passes through some blocker.

    Each hit records the blocker met first along the segment and its
    parameter in (0, 1).
    """
    if not getattr(space, "exact", False) and not hasattr(space, "left"):
        raise UnsupportedSpaceError("geometric blocking checks need an exact or product space")
    x, y, B = _check_disjoint(space, cfg, B)
    cfg = Configuration(x, y)
    hits = []
    if isinstance(space, LatticeTorus):
        segs, J, g = hit_table(space, cfg, T, B)
        for i, seg in enumerate(segs):
            row = J[i]
            best = None
            for k in np.flatnonzero(row):
                s = Fraction(int(row[k]), int(g[i]))
                if best is None or s < best[1]:
                    best = (int(k), s)
            hits.append({"segment": _segment_label(space, seg),
                         "blocker": None if best is None else best[0],
                         "param": None if best is None else best[1]})
    else:
        for seg in connecting_segments(space, cfg, T):
            best = None
            for k, b in enumerate(B):
                ps = space.passage_params(seg, b)
                if ps and (best is None or ps[0] < best[1]):
                    best = (k, ps[0])
            hits.append({"segment": _segment_label(space, seg),
                         "blocker": None if best is None else best[0],
                         "param": None if best is None else best[1]})
    blocked = all(h["blocker"] is not None for h in hits)
    return BlockReport(cfg, B, T, hits, blocked)


def incidence_masks(space, cfg: Configuration, candidates: Sequence, T) -> list[int]:
    """For each connecting segment, the bitmask of candidates it meets."""
    x, y, C = _check_disjoint(space, cfg, candidates)
    cfg = Configuration(x, y)
    if isinstance(space, LatticeTorus):
        _, J, _ = hit_table(space, cfg, T, C)
        weights = [1 << k for k in range(len(C))]
        return [sum(w for w, j in zip(weights, row) if j) for row in J.tolist()]
    masks = []
    for seg in connecting_segments(space, cfg, T):
        masks.append(sum(1 << k for k, c in enumerate(C) if space.passage_params(seg, c)))
    return masks


def uniform_grid(space: LatticeTorus, denominator: int, exclude: Sequence = ()) -> list[TorusPoint]:
    """All points with coordinates in (1/denominator) Z, minus ``exclude``."""
    ex = {space.point(p) for p in exclude}
    pts = [TorusPoint(tuple(Fraction(k, denominator) for k in ks))
           for ks in itertools.product(range(denominator), repeat=space.dim)]
    return [p for p in pts if p not in ex]


def search_min_blocking(space, cfg: Configuration, T, candidates: Sequence,
                        max_size: int, grid: str = "explicit") -> ThresholdBound:
    """Smallest candidate subset blocking Gamma_T, by exhaustive search.

    Subsets are tried by increasing size and lexicographically (in the
    canonical order of the candidates) within a size; the first success is
    returned.  Candidates are put in canonical order first so the answer
    does not depend on the order they were supplied in.
    """
    if not 1 <= max_size <= MAX_SEARCH_SIZE:
        raise ValueError(f"max_size must be in 1..{MAX_SEARCH_SIZE}")
    x, y, C = _check_disjoint(space, cfg, candidates)
    cfg = Configuration(x, y)
    C = tuple(sorted(set(C), key=_point_sort_key))
    total = sum(math.comb(len(C), k) for k in range(1, max_size + 1))
    if total > SUBSET_CAP:
        raise BudgetExceededError(f"{total} subsets exceed cap {SUBSET_CAP}")
    masks = sorted(set(incidence_masks(space, cfg, C, T)))
    upper, cert = None, None
    if isinstance(space, LatticeTorus):
        mids = space.midpoint_blocking_set(cfg)
        cert = space.certify_blocking_all(cfg, mids)
        upper = len(mids)
    tested = 0
    if not masks:
        return ThresholdBound(cfg, 0, upper if upper is not None else 0, T, grid, (), cert, 0)
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(range(len(C)), size):
            tested += 1
            sel = 0
            for k in combo:
                sel |= 1 << k
            if all(m & sel for m in masks):
                subset = tuple(C[k] for k in combo)
                up = size if upper is None else min(upper, size)
                return ThresholdBound(cfg, size, up, T, grid, subset, cert, tested)
    lower = max_size + 1
    if upper is not None and upper < lower:
        # the grid bound only speaks about the grid; drop the incomparable upper bound
        bound = ThresholdBound(cfg, lower, None, T, grid, None, cert, tested)
        bound.notes.append(f"certified upper bound {upper} uses off-grid points")
        return bound
    return ThresholdBound(cfg, lower, upper, T, grid, None, cert, tested)


def _point_sort_key(p):
    if isinstance(p, TorusPoint):
        return tuple(p.coords)
    if isinstance(p, tuple):
        return tuple(_point_sort_key(q) for q in p)
    return (p,)
