"""Flat tori R^n / Lambda with exact rational geometry.

Points are kept in the basis frame (fractional coordinates in [0, 1)),
so a lattice translate is an integer vector and every incidence question
reduces to integer arithmetic.  Lengths are compared through squared
lengths, which stay rational.

Two routes answer "does a segment pass through z":

* :meth:`LatticeTorus.passage_params` solves ``x + s*w = z (mod Z^n)``
  directly with Fractions, one segment at a time;
* the vectorised helpers (:func:`_first_hits`, the gcd rule in
  :meth:`LatticeTorus.count_curve`) work on whole integer arrays.

The test-suite checks one against the other.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .core import Configuration, GeodesicSegment

MAX_DIM = 4
_INT64_SAFE = 2**62


def as_fraction(v) -> Fraction:
    """Exact rational from int, Fraction, 'p/q' string or decimal float."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, float):
        # decimal reading: 0.1 means 1/10, not the binary expansion
        return Fraction(repr(v))
    return Fraction(str(v).strip())


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _denominator(values: Iterable[Fraction]) -> int:
    return reduce(_lcm, (v.denominator for v in values), 1)


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(as_fraction(c) % 1 for c in self.coords))

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __str__(self):
        return ",".join(str(c) for c in self.coords)


@dataclass(frozen=True)
class BlockingCertificate:
    """Evidence that a finite set blocks every geodesic from x to y.

    ``scope`` is ``"all"`` for a certificate covering every length, or
    ``{"T": value}`` when only Gamma_T was checked by enumeration.
    """

    config: Configuration
    blockers: tuple
    witnesses: tuple
    scope: object
    blocked: bool = True
    counterexample: object = None
    rule: str = ""

    def to_dict(self) -> dict:
        return {
            "config": {"x": str(self.config.x), "y": str(self.config.y)},
            "blockers": [str(b) for b in self.blockers],
            "witnesses": [dict(w) for w in self.witnesses],
            "scope": self.scope,
            "blocked": self.blocked,
            "rule": self.rule,
            "counterexample": self.counterexample,
        }


class LatticeTorus:
    """R^n modulo the lattice generated by the columns of ``basis``."""

    exact = True
    zero = Fraction(0)
    one = Fraction(1)

    def __init__(self, basis):
        rows = [[as_fraction(v) for v in row] for row in basis]
        n = len(rows)
        if n < 1 or n > MAX_DIM:
            raise ValueError(f"dimension {n} not supported (1..{MAX_DIM})")
        if any(len(r) != n for r in rows):
            raise ValueError("basis must be square")
        self.dim = n
        self.basis = tuple(tuple(r) for r in rows)
        det = _det(rows)
        if det == 0:
            raise ValueError("basis is singular")
        self.covolume = abs(det)
        self.gram = tuple(
            tuple(sum(rows[k][i] * rows[k][j] for k in range(n)) for j in range(n))
            for i in range(n)
        )
        self._gden = _denominator(v for r in self.gram for v in r)
        self._gint = np.array([[int(v * self._gden) for v in r] for r in self.gram], dtype=np.int64)
        inv = np.linalg.inv(np.array([[float(v) for v in r] for r in rows]))
        # |c_i| <= ||row_i(B^-1)|| * |v| for v = B c
        self._row_norms = np.linalg.norm(inv, axis=1)
        self._delta_sq = None

    @classmethod
    def from_columns(cls, columns) -> "LatticeTorus":
        cols = [[as_fraction(v) for v in c] for c in columns]
        n = len(cols)
        return cls([[cols[j][i] for j in range(n)] for i in range(n)])

    def __eq__(self, other):
        return isinstance(other, LatticeTorus) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self):
        return f"LatticeTorus(dim={self.dim}, basis={[[str(v) for v in r] for r in self.basis]})"

    def describe(self) -> dict:
        cols = [[str(self.basis[i][j]) for i in range(self.dim)] for j in range(self.dim)]
        return {"type": "torus", "dim": self.dim, "basis": cols}

    # -- points -------------------------------------------------------------
    def point(self, p) -> TorusPoint:
        if isinstance(p, TorusPoint):
            if len(p) != self.dim:
                raise ValueError("point dimension mismatch")
            return p
        if isinstance(p, str):
            p = p.split(",")
        elif not isinstance(p, (tuple, list, np.ndarray)):
            p = [p]
        if len(p) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(p)}")
        return TorusPoint(tuple(p))

    def same_point(self, p, q) -> bool:
        return self.point(p) == self.point(q)

    def norm_sq(self, c: Sequence[Fraction]) -> Fraction:
        n = self.dim
        return sum(c[i] * self.gram[i][j] * c[j] for i in range(n) for j in range(n))

    def cartesian(self, c: Sequence) -> tuple:
        return tuple(sum(self.basis[i][j] * as_fraction(c[j]) for j in range(self.dim))
                     for i in range(self.dim))

    def sample_point(self, rng: np.random.Generator, denominator: int = 2**16) -> TorusPoint:
        return TorusPoint(tuple(Fraction(int(k), denominator)
                                for k in rng.integers(0, denominator, size=self.dim)))

    @property
    def volume(self) -> float:
        return float(self.covolume)

    # -- lattice geometry ---------------------------------------------------
    def _box(self, offset: Sequence[Fraction], radius: float) -> np.ndarray:
        ranges = []
        for i in range(self.dim):
            r = float(self._row_norms[i]) * radius * (1 + 1e-12) + 1e-9
            lo = math.floor(-float(offset[i]) - r) - 1
            hi = math.ceil(-float(offset[i]) + r) + 1
            ranges.append(np.arange(lo, hi + 1, dtype=np.int64))
        grids = np.meshgrid(*ranges, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def injectivity_radius(self) -> Fraction:
        """delta^2 where delta is half the shortest nonzero lattice vector."""
        if self._delta_sq is None:
            # the first basis column bounds the shortest vector from above
            best = min(self.norm_sq([Fraction(int(i == j)) for i in range(self.dim)])
                       for j in range(self.dim))
            K = self._box([Fraction(0)] * self.dim, math.sqrt(best))
            K = K[np.any(K != 0, axis=1)]
            S = np.einsum("ni,ij,nj->n", K, self._gint, K)
            shortest = Fraction(int(S.min()), self._gden)
            self._delta_sq = shortest / 4
        return self._delta_sq

    def injectivity_radius_value(self) -> float:
        return math.sqrt(self.injectivity_radius())

    # -- enumeration --------------------------------------------------------
    def _displacement(self, cfg: Configuration) -> tuple:
        x, y = self.point(cfg.x), self.point(cfg.y)
        return x, y, tuple(b - a for a, b in zip(x, y))

    def _scaled_lattice(self, d: Sequence[Fraction], T, Q: int):
        """Integer vectors U = Q*(d + k) with 0 < |B U/Q| <= T.

        Returns ``(U, S, bound)`` where ``S = U^T Gint U`` and the length
        condition reads ``S <= bound``.  Rows are in canonical order.
        """
        T = as_fraction(T)
        bound = math.floor(self._gden * Q * Q * T * T)
        K = self._box(d, float(T))
        qd = np.array([int(v * Q) for v in d], dtype=np.int64)
        if bound >= _INT64_SAFE // 4:
            U = K.astype(object) * Q + qd.astype(object)
            S = np.einsum("ni,ij,nj->n", U, self._gint.astype(object), U)
        else:
            U = K * Q + qd
            S = np.einsum("ni,ij,nj->n", U, self._gint, U)
        keep = (S <= bound) & (S > 0)
        U, S, K = U[keep], S[keep], K[keep]
        order = np.lexsort(tuple(K[:, i] for i in reversed(range(self.dim))) + (S,))
        return U[order], S[order], bound

    def enumerate_joining(self, cfg: Configuration, T) -> list[GeodesicSegment]:
        """One segment per lattice translate with 0 < |y - x + lambda| <= T.

        Sorted by squared length, then lexicographically on lambda.
        """
        x, _, d = self._displacement(cfg)
        Q = _denominator(d)
        U, _, _ = self._scaled_lattice(d, T, Q)
        return [self._segment(x, tuple(Fraction(int(u), Q) for u in row)) for row in U]

    def enumerate_connecting(self, cfg: Configuration, T) -> list[GeodesicSegment]:
        x, _, d = self._displacement(cfg)
        Q = _denominator(d)
        U, _, _ = self._scaled_lattice(d, T, Q)
        U = U[_content(U) <= Q]
        return [self._segment(x, tuple(Fraction(int(u), Q) for u in row)) for row in U]

    def _segment(self, x: TorusPoint, w: tuple) -> GeodesicSegment:
        start = tuple(x.coords)
        return GeodesicSegment(self, start, tuple(a + b for a, b in zip(start, w)), self.norm_sq(w))

    def segment(self, start, displacement) -> GeodesicSegment:
        """Segment from ``start`` with displacement given in basis coordinates."""
        x = self.point(start)
        return self._segment(x, tuple(as_fraction(v) for v in displacement))

    def count_curve(self, cfg: Configuration, grid: Sequence):
        """Counts (n_T, m_T) for every T in ``grid`` from one enumeration.

        With U = Q*(y - x + lambda) and g = gcd(U), the line returns to a
        lift of x after parameter Q/g, so the segment is connecting iff
        g <= Q.
        """
        x, _, d = self._displacement(cfg)
        Q = _denominator(d)
        U, S, _ = self._scaled_lattice(d, max(as_fraction(t) for t in grid), Q)
        conn = _content(U) <= Q
        n, m = [], []
        for T in grid:
            T = as_fraction(T)
            b = math.floor(self._gden * Q * Q * T * T)
            inside = S <= b
            n.append(int(np.count_nonzero(inside)))
            m.append(int(np.count_nonzero(inside & conn)))
        return n, m

    def count_joining_many(self, x, ys: Sequence, grid: Sequence) -> np.ndarray:
        """n_T(x, y) for many y at once; shape (len(ys), len(grid))."""
        out = np.zeros((len(ys), len(grid)), dtype=np.int64)
        for i, y in enumerate(ys):
            out[i] = self.count_curve(Configuration(x, y), grid)[0]
        return out

    # -- segment protocol ---------------------------------------------------
    def segment_start(self, g: GeodesicSegment) -> TorusPoint:
        return TorusPoint(g.lift_start)

    def segment_end(self, g: GeodesicSegment) -> TorusPoint:
        return TorusPoint(g.lift_end)

    def segment_key(self, g: GeodesicSegment):
        return (g.lift_start, tuple(b - a for a, b in zip(g.lift_start, g.lift_end)))

    def displacement(self, g: GeodesicSegment) -> tuple:
        return tuple(b - a for a, b in zip(g.lift_start, g.lift_end))

    def point_at(self, g: GeodesicSegment, s) -> TorusPoint:
        s = as_fraction(s)
        return TorusPoint(tuple(a + s * (b - a) for a, b in zip(g.lift_start, g.lift_end)))

    def passage_params(self, g: GeodesicSegment, z) -> list[Fraction]:
        """All s in (0, 1) with x + s*w = z modulo the lattice.

        Pick a coordinate j with w_j != 0; then s = (e_j + k)/w_j for an
        integer k, and the remaining coordinates are checked exactly.
        """
        z = self.point(z)
        w = self.displacement(g)
        e = [zc - xc for zc, xc in zip(z.coords, g.lift_start)]
        nz = [i for i in range(self.dim) if w[i] != 0]
        for i in range(self.dim):
            if w[i] == 0 and e[i].denominator != 1:
                return []
        j = min(nz, key=lambda i: abs(w[i]))
        wj, ej = w[j], e[j]
        # 0 < (ej + k)/wj < 1
        lo, hi = sorted((-ej, wj - ej))
        out = []
        for k in range(math.floor(lo), math.ceil(hi) + 1):
            s = (ej + k) / wj
            if not (0 < s < 1):
                continue
            if all((s * w[i] - e[i]).denominator == 1 for i in nz):
                out.append(s)
        return sorted(out)

    def restrict(self, g: GeodesicSegment, a, b) -> GeodesicSegment:
        a, b = as_fraction(a), as_fraction(b)
        w = self.displacement(g)
        start = self.point_at(g, a)
        return self._segment(start, tuple((b - a) * c for c in w))

    def length_le(self, length_sq, T) -> bool:
        T = as_fraction(T)
        return length_sq <= T * T

    def scaled_length_le(self, length_sq, s, T, half: bool = False) -> bool:
        T = as_fraction(T) / (2 if half else 1)
        return as_fraction(s) ** 2 * length_sq <= T * T

    # -- blocking -----------------------------------------------------------
    def midpoint_blocking_set(self, cfg: Configuration) -> list[TorusPoint]:
        """Half-lattice translates of the midpoint (x != y) or of x (x == y).

        Residue classes mu are taken in {0, 1}^n, i.e. Lambda / 2 Lambda.
        """
        x, y = self.point(cfg.x), self.point(cfg.y)
        residues = list(itertools.product((0, 1), repeat=self.dim))
        half = Fraction(1, 2)
        if x == y:
            return [TorusPoint(tuple(c + half * m for c, m in zip(x, mu)))
                    for mu in residues if any(mu)]
        # midpoint of the straight displacement d; other choices differ by mu/2
        d = [b - a for a, b in zip(x, y)]
        mid = [a + half * c for a, c in zip(x, d)]
        return [TorusPoint(tuple(c + half * m for c, m in zip(mid, mu))) for mu in residues]

    def blocking_witness(self, cfg: Configuration, lam: Sequence[int],
                         blockers: Sequence[TorusPoint]):
        """(t, blocker index) for the joining segment along y - x + lam.

        For x != y the midpoint t = 1/2 always lands in the midpoint set.
        For x == y write lam = 2^k lam' with lam' not in 2 Lambda; then
        t = 2^-(k+1) lands on x + lam'/2.
        """
        x, y = self.point(cfg.x), self.point(cfg.y)
        lam = [int(v) for v in lam]
        index = {b: i for i, b in enumerate(blockers)}
        if x == y:
            if not any(lam):
                raise ValueError("zero lattice vector is not a geodesic")
            k = 0
            while all(v % 2 == 0 for v in lam):
                lam = [v // 2 for v in lam]
                k += 1
            t = Fraction(1, 2 ** (k + 1))
            w = [Fraction(v * 2**k) for v in lam]
        else:
            t = Fraction(1, 2)
            w = [b - a + v for a, b, v in zip(x, y, lam)]
        hit = TorusPoint(tuple(c + t * v for c, v in zip(x, w)))
        return t, index.get(hit)

    def certify_blocking_all(self, cfg: Configuration, blockers: Sequence,
                             T_fallback=20) -> BlockingCertificate:
        """All-length certificate when ``blockers`` contains the midpoint set.

        Otherwise falls back to a finite-length enumeration check at
        ``T_fallback``.
        """
        from .blocking import verify_blocking_finite  # local: blocking imports this module

        x, y = self.point(cfg.x), self.point(cfg.y)
        B = tuple(self.point(b) for b in blockers)
        if any(b == x or b == y for b in B):
            raise ValueError("blockers must avoid the configuration points")
        cfg = Configuration(x, y)
        mids = self.midpoint_blocking_set(cfg)
        if not set(mids) <= set(B):
            rep = verify_blocking_finite(self, cfg, B, T_fallback)
            return BlockingCertificate(
                cfg, B, tuple(
                    {"segment": h["segment"], "t": str(h["param"]), "blocker": h["blocker"]}
                    for h in rep.hits if h["blocker"] is not None),
                {"T": str(as_fraction(T_fallback))},
                blocked=rep.blocked,
                counterexample=None if rep.blocked else rep.first_unblocked(),
                rule="finite enumeration",
            )
        witnesses = []
        for mu in itertools.product((0, 1), repeat=self.dim):
            if x == y and not any(mu):
                continue
            t, idx = self.blocking_witness(cfg, mu, B)
            w = [b - a + m for a, b, m in zip(x, y, mu)]
            hit = TorusPoint(tuple(c + t * v for c, v in zip(x, w)))
            # exact incidence: x + t*v = blocker (mod Lambda)
            if idx is None or hit != B[idx]:
                raise AssertionError("midpoint witness failed exact incidence")
            witnesses.append({"residue": list(mu), "t": str(t), "blocker": idx})
        rule = ("lambda = 2^k lambda', t = 2^-(k+1), blocker x + lambda'/2"
                if x == y else "t = 1/2, blocker (x+y)/2 + lambda/2")
        return BlockingCertificate(cfg, B, tuple(witnesses), "all", rule=rule)


def make_torus(basis) -> LatticeTorus:
    """Torus from a square rational matrix whose columns generate the lattice."""
    return LatticeTorus(basis)


def unit_torus(dim: int = 2) -> LatticeTorus:
    return LatticeTorus([[int(i == j) for j in range(dim)] for i in range(dim)])


def injectivity_radius(t: LatticeTorus) -> Fraction:
    return t.injectivity_radius()


def enumerate_joining(t: LatticeTorus, cfg: Configuration, T) -> list[GeodesicSegment]:
    return t.enumerate_joining(cfg, T)


def midpoint_blocking_set(t: LatticeTorus, cfg: Configuration) -> list[TorusPoint]:
    return t.midpoint_blocking_set(cfg)


def certify_blocking_all(t: LatticeTorus, cfg: Configuration, blockers, T_fallback=20):
    return t.certify_blocking_all(cfg, blockers, T_fallback)


def _det(rows) -> Fraction:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    return sum((-1) ** j * rows[0][j] * _det([r[:j] + r[j + 1:] for r in rows[1:]])
               for j in range(n))


def _content(U: np.ndarray) -> np.ndarray:
    """Row-wise gcd of an integer array."""
    if U.dtype == object:
        return np.array([reduce(math.gcd, (abs(int(v)) for v in row), 0) for row in U],
                        dtype=object)
    return np.gcd.reduce(np.abs(U), axis=1)


def _xgcd_rows(P: np.ndarray):
    """Row-wise Bezout vectors: returns c with sum(c * P, axis=1) == gcd(P)."""
    N, n = P.shape
    g = P[:, 0].copy()
    C = np.zeros_like(P)
    C[:, 0] = 1
    for i in range(1, n):
        a, b = g, P[:, i]
        # extended Euclid on (a, b), vectorised
        old_r, r = a.copy(), b.copy()
        old_s, s = np.ones_like(a), np.zeros_like(a)
        old_t, t = np.zeros_like(a), np.ones_like(a)
        while np.any(r != 0):
            nz = r != 0
            q = np.zeros_like(r)
            q[nz] = old_r[nz] // r[nz]
            old_r, r = np.where(nz, r, old_r), np.where(nz, old_r - q * r, r)
            old_s, s = np.where(nz, s, old_s), np.where(nz, old_s - q * s, s)
            old_t, t = np.where(nz, t, old_t), np.where(nz, old_t - q * t, t)
        C[:, :i] *= old_s[:, None]
        C[:, i] = old_t
        g = old_r
    sign = np.where(g < 0, -1, 1)
    return C * sign[:, None], g * sign


def _first_hits(U: np.ndarray, Q: int, targets: np.ndarray):
    """Earliest interior passage of each row-segment through each target.

    ``U`` holds Q*w for segments starting at x, ``targets`` holds
    Q*(z - x) for each candidate z.  Writing U = g*P with P primitive, the
    segment meets z at s = j/g for integers 0 < j < g with j*P = A mod Q.
    Returns an (N, K) array of the smallest such j (or 0 when none) and
    the content vector g.
    """
    g = _content(U).astype(np.int64)
    P = U // g[:, None]
    C, _ = _xgcd_rows(P)
    N = U.shape[0]
    out = np.zeros((N, len(targets)), dtype=np.int64)
    for k, A in enumerate(targets):
        A = np.asarray(A, dtype=np.int64)
        # j = (C . A) mod Q is forced when a solution exists
        j = np.mod(C @ A, Q)
        j = np.where(j == 0, Q, j)
        ok = np.all(np.mod(j[:, None] * P - A[None, :], Q) == 0, axis=1)
        ok &= j < g
        out[:, k] = np.where(ok, j, 0)
    return out, g


def hit_table(t: LatticeTorus, cfg: Configuration, T, blockers: Sequence):
    """Connecting segments of length <= T and their first blocker passages.

    Returns ``(segments, J, g)``: ``J[i, k] > 0`` means segment ``i`` meets
    blocker ``k`` first at parameter ``J[i, k] / g[i]``.
    """
    x, _, d = t._displacement(cfg)
    B = [t.point(b) for b in blockers]
    offsets = [[bc - xc for bc, xc in zip(b, x)] for b in B]
    Q = _denominator(list(d) + [v for o in offsets for v in o])
    U, _, _ = t._scaled_lattice(d, T, Q)
    U = U[_content(U) <= Q]
    if U.dtype == object:
        U = U.astype(np.int64)
    targets = [[int(v * Q) for v in o] for o in offsets]
    J, g = _first_hits(U, Q, targets) if len(U) else (np.zeros((0, len(B)), np.int64),
                                                       np.zeros(0, np.int64))
    segs = [t._segment(x, tuple(Fraction(int(u), Q) for u in row)) for row in U]
    return segs, J, g
