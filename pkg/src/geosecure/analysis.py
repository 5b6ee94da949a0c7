"""Inequality checkers and growth / entropy estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
from scipy import special, stats

from .core import Configuration, CountCurve
from .flat_torus import LatticeTorus, as_fraction
from .hyperbolic import FuchsianSurface

BATCHES = 10


class InsufficientDataError(ValueError):
    pass


@dataclass
class GrowthFit:
    model: str
    parameter: float
    residual: float
    window: tuple
    intercept: float = 0.0
    stderr: float | None = None
    dropped: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in ("polynomial", "exponential"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")
        if not self.window:
            raise ValueError("empty window")

    def to_dict(self) -> dict:
        return {"model": self.model, "parameter": self.parameter, "residual": self.residual,
                "window": [_num(t) for t in self.window], "intercept": self.intercept,
                "stderr": self.stderr, "dropped": [_num(t) for t in self.dropped],
                "meta": self.meta}


@dataclass
class BoundCheck:
    name: str
    inputs: dict
    lhs: Any
    rhs: Any
    satisfied: bool
    strict: bool = False
    flags: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        ok = self.lhs < self.rhs if self.strict else self.lhs <= self.rhs
        if bool(ok) != self.satisfied:
            raise ValueError("satisfied flag disagrees with lhs/rhs")

    def to_dict(self) -> dict:
        return {"name": self.name, "inputs": {k: _num(v) for k, v in self.inputs.items()},
                "lhs": _num(self.lhs), "rhs": _num(self.rhs), "strict": self.strict,
                "satisfied": self.satisfied, "flags": list(self.flags),
                "extra": {k: _num(v) for k, v in self.extra.items()}}


def _num(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _exact(v):
    """Fractions stay exact, ints become Fractions, floats stay floats."""
    if isinstance(v, (Fraction, int, np.integer)):
        return Fraction(int(v)) if not isinstance(v, Fraction) else v
    return float(v)


# -- counting inequalities ------------------------------------------------------
def check_mn_bound(n_T: int, m_T: int, T, delta=None, *, delta_sq=None) -> BoundCheck:
    """m_T <= n_T <= (T / 2 delta)^2 m_T.

    ``delta_sq`` may be given instead of ``delta`` to keep the check exact
    when delta is irrational (flat tori).  ``lhs``/``rhs`` record the upper
    inequality; the lower one is folded into ``satisfied``.
    """
    if n_T < 0 or m_T < 0:
        raise ValueError("counts must be nonnegative")
    if (delta is None) == (delta_sq is None):
        raise ValueError("give exactly one of delta and delta_sq")
    T = _exact(T)
    dsq = _exact(delta_sq) if delta_sq is not None else _exact(delta) ** 2
    if not T > 0 or not dsq > 0:
        raise ValueError("T and delta must be positive")
    ratio = T * T / (4 * dsq)
    rhs = ratio * m_T
    ok = m_T <= n_T and n_T <= rhs
    flags = [] if m_T <= n_T else ["m_T exceeds n_T"]
    if T * T < 4 * dsq and n_T > 0:
        # below 2 delta the fiber factor drops under 1 while fibers hold at least one segment
        flags.append("T < 2*delta: factor (T/2delta)^2 < 1")
    # the lower inequality failing is reported through lhs > rhs
    lhs = n_T if ok or n_T > rhs else rhs + 1
    return BoundCheck("m&n", {"n_T": n_T, "m_T": m_T, "T": T, "delta_sq": dsq},
                      lhs, rhs, ok, flags=flags, extra={"fiber_bound": ratio})


def check_split_bound(m_xyz: int, m_xz_half: int, m_zy_half: int) -> BoundCheck:
    """m_T(x, y; z) <= m_{T/2}(x, z) + m_{T/2}(z, y)."""
    if min(m_xyz, m_xz_half, m_zy_half) < 0:
        raise ValueError("counts must be nonnegative")
    rhs = m_xz_half + m_zy_half
    return BoundCheck("split", {"m_xyz": m_xyz, "m_xz_half": m_xz_half, "m_zy_half": m_zy_half},
                      m_xyz, rhs, m_xyz <= rhs)


def check_uniform_security_bound(n_T: int, T, delta, s: int) -> BoundCheck:
    """n_T < (s/2) (T/delta)^(3 + log2 s) for a uniformly secure space with threshold s."""
    if s < 1:
        raise ValueError("s must be at least 1")
    T, delta = float(T), float(delta)
    if T <= 0 or delta <= 0:
        raise ValueError("T and delta must be positive")
    e = math.log2(s)
    rhs = (s / 2) * (T / delta) ** (3 + e)
    m_bound = 2 * s * (T / delta) ** (1 + e)
    return BoundCheck("uniform-security", {"n_T": n_T, "T": T, "delta": delta, "s": s},
                      n_T, rhs, n_T < rhs, strict=True, extra={"m_bound": m_bound})


def check_entropy_window(curve: CountCurve, h1: float, h2: float, T_min: float = 0.0) -> BoundCheck:
    """e^(h1 T) <= n_T <= e^(h2 T) on every grid point with T >= T_min.

    ``lhs`` is the worst deviation of log(n_T)/T outside [h1, h2] (zero or
    negative when inside), ``rhs`` is 0.
    """
    if not (h1 > 0 and h2 > 0):
        raise ValueError("rates must be positive")
    pts = [(float(T), n) for T, n in zip(curve.grid, curve.n) if float(T) >= T_min]
    if not pts:
        raise InsufficientDataError("empty window")
    worst = -math.inf
    rates = []
    for T, n in pts:
        r = math.log(n) / T if n > 0 else -math.inf
        rates.append(r)
        worst = max(worst, h1 - r, r - h2)
    flags = []
    if h2 >= 2 * h1:
        flags.append("h2 >= 2*h1: window too wide for the insecurity argument")
    return BoundCheck("entropy-window", {"h1": h1, "h2": h2, "T_min": T_min},
                      worst, 0.0, worst <= 0, flags=flags,
                      extra={"rates": [round(r, 12) for r in rates], "T": [T for T, _ in pts]})


# -- fits -----------------------------------------------------------------------
def _window(grid, values, window):
    g = np.asarray([float(t) for t in grid])
    v = np.asarray(values, dtype=float)
    if window is None:
        lo = g.min() + (g.max() - g.min()) / 2
        sel = g >= lo - 1e-12
    else:
        sel = (g >= window[0] - 1e-12) & (g <= window[1] + 1e-12)
    return g[sel], v[sel]


def _linfit(x, y):
    res = stats.linregress(x, y)
    resid = float(np.sum((y - (res.intercept + res.slope * x)) ** 2))
    return float(res.slope), float(res.intercept), resid


def fit_growth(curve: CountCurve, model: str = "polynomial", window=None) -> GrowthFit:
    """Least-squares growth fit on the log scale.

    Polynomial: slope of log n against log T (degree d).  Exponential:
    slope of log n against T (rate h).  By default only the upper half of
    the T range is used; zero counts are dropped and recorded.
    """
    if model not in ("polynomial", "exponential"):
        raise ValueError(f"unknown model {model!r}")
    positive = [(t, n) for t, n in zip(curve.grid, curve.n) if n > 0]
    if len(positive) < 4:
        raise InsufficientDataError("need at least 4 grid points with positive counts")
    dropped = [t for t, n in zip(curve.grid, curve.n) if n <= 0]
    g, v = _window([t for t, _ in positive], [n for _, n in positive], window)
    if len(g) < 2:
        raise InsufficientDataError("window holds fewer than 2 points")
    x = np.log(g) if model == "polynomial" else g
    slope, icpt, resid = _linfit(x, np.log(v))
    return GrowthFit(model, slope, resid, (float(g[0]), float(g[-1])), icpt, None, dropped)


# -- Monte Carlo -----------------------------------------------------------------
def _batch_se(batch_values: np.ndarray) -> float:
    b = np.asarray(batch_values, dtype=float)
    return float(np.std(b, ddof=1) / math.sqrt(len(b))) if len(b) > 1 else float("nan")


def _sample_counts(space, sample_count: int, grid, rng):
    """Counts n_T(x, y) for sample_count pairs, grouped into BATCHES batches.

    Each batch shares one sampled x with independently sampled y, so the
    batches are independent and the per-batch means give the error bar.
    """
    if not hasattr(space, "sample_point") or not hasattr(space, "count_joining_many"):
        raise NotImplementedError(f"sampling unsupported for {type(space).__name__}")
    per = max(1, sample_count // BATCHES)
    batches = []
    for _ in range(BATCHES):
        x = space.sample_point(rng)
        ys = [space.sample_point(rng) for _ in range(per)]
        batches.append(np.asarray(space.count_joining_many(x, ys, grid), dtype=float))
    return np.stack(batches)          # (BATCHES, per, len(grid))


def mane_estimate(space, sample_count: int, Tgrid: Sequence, rng_seed: int,
                  window=None) -> GrowthFit:
    """Exponential growth rate of the averaged count over M x M.

    The averaged count A(T) is estimated on every grid point; the rate is
    the least-squares slope of log A against T (upper half of the grid by
    default).  ``meta`` also records (1/T) log A(T) per grid point.
    """
    if sample_count < 100:
        raise ValueError("sample_count must be at least 100")
    grid = sorted(float(t) for t in Tgrid)
    if len(grid) < 2:
        raise InsufficientDataError("need at least two T values")
    rng = np.random.default_rng(rng_seed)
    counts = _sample_counts(space, sample_count, grid, rng)
    bmeans = counts.mean(axis=1)                       # (BATCHES, len(grid))
    avg = np.array([math.fsum(bmeans[:, j]) / BATCHES for j in range(len(grid))])
    if np.any(avg <= 0):
        raise InsufficientDataError("zero average count on the grid")
    g, a = _window(grid, avg, window)
    if len(g) < 2:
        raise InsufficientDataError("window holds fewer than 2 points")
    slope, icpt, resid = _linfit(g, np.log(a))
    sel = np.isin(np.asarray(grid), g)
    slopes = []
    for b in bmeans:
        if np.all(b[sel] > 0):
            slopes.append(_linfit(g, np.log(b[sel]))[0])
    meta = {
        "samples": int(counts.shape[0] * counts.shape[1]),
        "seed": int(rng_seed),
        "average": [float(v) for v in avg],
        "average_se": [_batch_se(bmeans[:, j]) for j in range(len(grid))],
        "log_rate": [float(math.log(v) / t) for v, t in zip(avg, grid)],
        "grid": grid,
    }
    return GrowthFit("exponential", slope, resid, (float(g[0]), float(g[-1])), icpt,
                     _batch_se(np.array(slopes)) if len(slopes) > 1 else None, [], meta)


def ball_volume(space, T: float) -> float:
    """Volume of a radius-T ball in the universal cover."""
    if isinstance(space, LatticeTorus):
        n = space.dim
        return float(math.pi ** (n / 2) / special.gamma(n / 2 + 1) * T ** n)
    if isinstance(space, FuchsianSurface):
        return 2 * math.pi * (math.cosh(T) - 1)
    raise NotImplementedError(f"no ball volume for {type(space).__name__}")


def berger_bott_check(space, x, T: float, sample_count: int = 200, rng_seed: int = 0) -> BoundCheck:
    """Compare a Monte-Carlo estimate of the integral of n_T(x, .) with Vol B(x~, T).

    Satisfied when the estimate is at least the volume minus three batch
    standard errors; on flat tori the estimate must also match the volume
    within 2%.
    """
    try:
        vol = ball_volume(space, float(T))
    except NotImplementedError as exc:
        from .core import UnsupportedSpaceError
        raise UnsupportedSpaceError(str(exc)) from exc
    rng = np.random.default_rng(rng_seed)
    x = space.point(x)
    per = max(1, sample_count // BATCHES)
    ys = [space.sample_point(rng) for _ in range(per * BATCHES)]
    counts = np.asarray(space.count_joining_many(x, ys, [T]), dtype=float)[:, 0]
    bmeans = counts.reshape(BATCHES, per).mean(axis=1) * float(space.volume)
    est = math.fsum(bmeans) / BATCHES
    se = _batch_se(bmeans)
    # slack form: satisfied iff lhs <= 0
    lhs = float(vol - 3 * se - est)
    flags = []
    rel_err = float(abs(est - vol) / vol) if vol > 0 else 0.0
    if isinstance(space, LatticeTorus):
        lhs = max(lhs, float(rel_err) - 0.02)
        if rel_err > 0.02:
            flags.append("torus estimate differs from the ball volume by more than 2%")
    return BoundCheck("berger-bott", {"T": float(T), "samples": per * BATCHES, "seed": rng_seed},
                      lhs, 0.0, lhs <= 0, flags=flags,
                      extra={"estimate": est, "stderr": se, "volume": vol, "relative_error": rel_err})


def check_curve(curve: CountCurve, name: str, **params) -> list[BoundCheck]:
    """Run a named check on every row of a count curve."""
    out = []
    if name == "mn":
        kw = {"delta_sq": as_fraction(params["delta_sq"])} if "delta_sq" in params else {"delta": params["delta"]}
        for T, n, m in curve.rows():
            out.append(check_mn_bound(n, m, T, **kw))
    elif name == "uniform-security":
        for T, n, _ in curve.rows():
            out.append(check_uniform_security_bound(n, T, params["delta"], int(params["s"])))
    elif name == "entropy-window":
        out.append(check_entropy_window(curve, params["h1"], params["h2"], params.get("T_min", 0.0)))
    else:
        raise ValueError(f"unknown check {name!r}")
    return out
