"""Acceptance suite: one printed PASS/FAIL line per criterion.

Tolerances below are the pinned acceptance values; they are not tuned to
the implementation.
"""
from __future__ import annotations

import math
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from geosecure.analysis import (berger_bott_check, check_mn_bound, check_split_bound,
                                check_uniform_security_bound, fit_growth, mane_estimate)
from geosecure.blocking import search_min_blocking, uniform_grid, verify_blocking_finite
from geosecure.core import (Configuration, connecting_segments, count_curve, split_at_blocker,
                            trim_to_connecting)
from geosecure.flat_torus import LatticeTorus, TorusPoint, hit_table, unit_torus
from geosecure.hyperbolic import make_genus2, non_blocking_certificate, unpruned_orbit_oracle
from geosecure.product import ProductSpace

from oracles import brute_force_count, random_point, random_torus

F = Fraction
T_GRID = list(range(1, 21))


@pytest.fixture(scope="module")
def genus2():
    return make_genus2()


# 1 -------------------------------------------------------------------------------
def test_c01_gauss_count_oracle(acceptance):
    rng = np.random.default_rng(101)
    cases = []
    for _ in range(25):
        t = random_torus(rng, 2, short=False)
        cases.append((t, random_point(rng, 2), random_point(rng, 2), F(int(rng.integers(1, 31)))))
    cases[0] = (cases[0][0], cases[0][1], cases[0][2], F(30))
    t0 = time.perf_counter()
    ours = [t.count_curve(Configuration(x, y), [T])[0][0] for t, x, y, T in cases]
    elapsed = time.perf_counter() - t0
    ref = [brute_force_count(t, x, y, T) for t, x, y, T in cases]
    mism = sum(a != b for a, b in zip(ours, ref))
    acceptance.record(1, mism == 0 and elapsed < 10,
                      f"25 random 2-tori, T<=30: {mism} mismatches, enumeration {elapsed:.2f}s (<10s)")


# 2 -------------------------------------------------------------------------------
def _fiber_check(t, cfg, T):
    """Trim every joining segment; return (surjective, max fiber, bound)."""
    joining = t.enumerate_joining(cfg, T)
    conn = {g.key() for g in connecting_segments(t, cfg, T)}
    fibers = Counter(trim_to_connecting(g).key() for g in joining)
    bound = F(T) ** 2 / (4 * t.injectivity_radius())
    return set(fibers) == conn, max(fibers.values(), default=0), bound


def test_c02_mn_bound(acceptance):
    rng = np.random.default_rng(202)
    failures, checks = 0, 0
    fiber_fail = 0
    for i in range(100):
        t = random_torus(rng, 2, short=True)
        cfg = Configuration(random_point(rng, 2), random_point(rng, 2))
        if i % 10 == 0:
            cfg = Configuration(cfg.x, cfg.x)
        curve = count_curve(t, cfg, T_GRID)
        dsq = t.injectivity_radius()
        for T, n, m in curve.rows():
            checks += 1
            failures += not check_mn_bound(n, m, T, delta_sq=dsq).satisfied
        T_fib = F(10) if i % 5 else F(20)
        surj, worst, bound = _fiber_check(t, cfg, T_fib)
        fiber_fail += not (surj and worst <= bound)
    u = unit_torus(2)
    pinned = count_curve(u, Configuration("0,0", "1/2,0"), [F(3, 2)])
    pin_ok = (pinned.n[0], pinned.m[0]) == (8, 6)
    acceptance.record(2, failures == 0 and fiber_fail == 0 and pin_ok,
                      f"{checks} (config,T) checks, {failures} violations; lambda-map fibers "
                      f"{fiber_fail} failures; pinned (n,m)={pinned.n[0], pinned.m[0]}")


# 3 -------------------------------------------------------------------------------
def _through_instance(rng):
    """A random configuration with z placed on one of its short connecting segments."""
    while True:
        t = random_torus(rng, 2, short=False)
        x, y = random_point(rng, 2), random_point(rng, 2)
        cfg = Configuration(x, y)
        segs = connecting_segments(t, cfg, 6)
        if not segs:
            continue
        g = segs[int(rng.integers(len(segs)))]
        s = F(int(rng.integers(1, 7)), 7)
        z = t.point_at(g, s)
        if z in (x, y):
            continue
        return t, cfg, z


def test_c03_split_bound(acceptance):
    rng = np.random.default_rng(303)
    grid = [F(k) for k in (2, 5, 8, 11, 14, 17, 20)]
    viol, checks, inj_fail, positive = 0, 0, 0, 0
    for i in range(100):
        t, cfg, z = _through_instance(rng)
        segs, J, g = hit_table(t, cfg, 20, [z])
        through = [s for s, j in zip(segs, J[:, 0]) if j]
        xz = count_curve(t, Configuration(cfg.x, z), [T / 2 for T in grid])
        zy = count_curve(t, Configuration(z, cfg.y), [T / 2 for T in grid])
        for k, T in enumerate(grid):
            m_xyz = sum(1 for s in through if s.length_sq <= T * T)
            positive += m_xyz > 0
            checks += 1
            viol += not check_split_bound(m_xyz, xz.m[k], zy.m[k]).satisfied
        if i < 30:
            # the split map is injective into the two connecting families
            T = F(12)
            images = []
            for s in through:
                if s.length_sq > T * T:
                    continue
                piece = split_at_blocker(s, z, T)
                ok = piece.length_sq * 4 <= T * T and not t.passage_params(piece, piece.start) \
                    and not t.passage_params(piece, piece.end)
                ends = (piece.start, piece.end)
                ok &= ends in ((cfg.x, z), (z, cfg.y))
                inj_fail += not ok
                images.append(piece.key())
            inj_fail += len(images) != len(set(images))
    acceptance.record(3, viol == 0 and inj_fail == 0 and positive > 0,
                      f"{checks} checks ({positive} with m(x,y;z)>0), {viol} violations, "
                      f"mu-map failures {inj_fail}")


# 4 -------------------------------------------------------------------------------
def test_c04_torus_certificates(acceptance):
    rng = np.random.default_rng(404)
    bad, sizes_bad = 0, 0
    for i in range(100):
        dim = 1 + i % 3
        t = random_torus(rng, dim, short=False)
        x = random_point(rng, dim)
        y = x if i % 4 == 0 else random_point(rng, dim)
        cfg = Configuration(x, y)
        B = t.midpoint_blocking_set(cfg)
        cert = t.certify_blocking_all(cfg, B)
        rep = verify_blocking_finite(t, cfg, B, 20)
        bad += not (cert.scope == "all" and cert.blocked and rep.blocked)
        expected = 2 ** dim - (1 if x == y else 0)
        sizes_bad += len(B) != expected
    u = unit_torus(2)
    n_xy = len(u.midpoint_blocking_set(Configuration("0,0", "1/3,1/5")))
    n_xx = len(u.midpoint_blocking_set(Configuration("1/3,1/5", "1/3,1/5")))
    acceptance.record(4, bad == 0 and sizes_bad == 0 and n_xy <= 4 and n_xx == 3,
                      f"100 configs dims 1-3: {bad} certificate/finite disagreements, size errors "
                      f"{sizes_bad}; dim-2 sizes x!=y {n_xy}, x=y {n_xx}")


# 5 -------------------------------------------------------------------------------
def test_c05_grid_minimality(acceptance):
    u = unit_torus(2)
    cfg = Configuration(u.point("0,0"), u.point("1/2,1/2"))
    cand = uniform_grid(u, 4, exclude=[cfg.x, cfg.y])
    t0 = time.perf_counter()
    bound = search_min_blocking(u, cfg, 5, cand, 3, grid="uniform/4")
    elapsed = time.perf_counter() - t0
    acceptance.record(5, bound.lower == 4 and bound.subset is None and elapsed < 60,
                      f"quarter grid, T=5, max size 3: lower bound {bound.lower} "
                      f"({bound.tested} subsets, {elapsed:.2f}s, <60s)")


# 6 -------------------------------------------------------------------------------
def test_c06_polynomial_growth(acceptance):
    rng = np.random.default_rng(606)
    grid = [F(k) for k in range(10, 41)]
    msgs, ok = [], True
    for dim, target, tol in ((2, 2.0, 0.2), (3, 3.0, 0.3)):
        for j in range(3):
            t = unit_torus(dim) if j == 0 else random_torus(rng, dim, short=False)
            cfg = Configuration(random_point(rng, dim), random_point(rng, dim))
            curve = count_curve(t, cfg, grid)
            fit = fit_growth(curve, "polynomial", window=(10, 40))
            ok &= abs(fit.parameter - target) <= tol
            delta = math.sqrt(t.injectivity_radius())
            ok &= all(check_uniform_security_bound(n, T, delta, 2 ** dim).satisfied
                      for T, n, _ in curve.rows())
            msgs.append(f"d{dim}={fit.parameter:.3f}")
    acceptance.record(6, ok, "degree fits over [10,40]: " + " ".join(msgs)
                      + "; uniform-security bound with s=2^n at every grid point")


# 7 -------------------------------------------------------------------------------
def test_c07_exponential_growth(acceptance, genus2):
    s = genus2
    grid = [6 + 0.5 * k for k in range(9)]
    t0 = time.perf_counter()
    curve = count_curve(s, Configuration("c1", "c2"), grid)
    elapsed = time.perf_counter() - t0
    fit = fit_growth(curve, "exponential", window=(6, 10))
    oracle_ok = True
    for x, y in (("c0", "c0"), ("c1", "c2"), ("c3", "m2")):
        px, py = s.point(x), s.point(y)
        ours = np.sort([e.displacement for e in s.enumerate_orbit(px.w, py.w, 6)])
        ref6 = unpruned_orbit_oracle(s, px.w, py.w, 6, 6)
        ref7 = unpruned_orbit_oracle(s, px.w, py.w, 6, 7)
        oracle_ok &= len(ref6) == len(ref7) == len(ours) and np.allclose(np.sort(ref7), ours, atol=1e-9)
    acceptance.record(7, abs(fit.parameter - 1.0) <= 0.15 and oracle_ok and elapsed < 300,
                      f"genus-2 rate h={fit.parameter:.3f} over [6,10]; pruned walk equals "
                      f"unpruned oracle at T=6: {oracle_ok}; T=10 curve {elapsed:.1f}s (<300s)")


# 8 -------------------------------------------------------------------------------
def test_c08_insecurity_mechanism(acceptance, genus2):
    s = genus2
    rng = np.random.default_rng(808)
    fails, first_T = 0, []
    for _ in range(20):
        x, y = s.sample_point(rng), s.sample_point(rng)
        k = int(rng.integers(1, 9))
        Z = [s.sample_point(rng) for _ in range(k)]
        hit = None
        for T in (2.0, 4.0, 6.0, 8.0, 10.0):
            if non_blocking_certificate(s, Configuration(x, y), Z, T).verdict == "violated":
                hit = T
                break
        fails += hit is None
        first_T.append(hit)
    worst = max((T for T in first_T if T is not None), default=None)
    acceptance.record(8, fails == 0, f"20 random candidate sets (size 1-8): {20 - fails} refuted "
                                     f"at some T<=10 (largest first T {worst})")


# 9 -------------------------------------------------------------------------------
def test_c09_entropy_estimators(acceptance, genus2):
    u = unit_torus(2)
    torus_fit = mane_estimate(u, 1000, [20, 24, 28, 32, 36, 40], rng_seed=9)
    hyp_fit = mane_estimate(genus2, 200, [6, 7, 8, 9, 10], rng_seed=9)
    bb_torus = berger_bott_check(u, "0,0", 10, 1000, 9)
    bb_hyp = berger_bott_check(genus2, "c0", 8, 200, 9)
    ok = (torus_fit.parameter <= 0.1 and 0.8 <= hyp_fit.parameter <= 1.2
          and bb_torus.satisfied and bb_torus.extra["relative_error"] <= 0.02 and bb_hyp.satisfied)
    acceptance.record(9, ok, f"torus rate {torus_fit.parameter:.4f} (<=0.1), genus-2 rate "
                             f"{hyp_fit.parameter:.3f} in [0.8,1.2]; volume checks torus rel.err "
                             f"{bb_torus.extra['relative_error']:.4f}, genus-2 {bb_hyp.satisfied}")


# 10 ------------------------------------------------------------------------------
def test_c10_product_oracle(acceptance):
    rng = np.random.default_rng(1010)
    circle = LatticeTorus([[1]])
    P = ProductSpace(circle, circle)
    sq = unit_torus(2)
    mism = 0
    for i in range(25):
        a, b = random_point(rng, 1), random_point(rng, 1)
        c, d = random_point(rng, 1), random_point(rng, 1)
        if i % 5 == 0:
            b = a
        if i % 7 == 0:
            d = c
        pc = P.count_curve(Configuration((a, c), (b, d)), T_GRID)
        tc = sq.count_curve(Configuration((a.coords[0], c.coords[0]), (b.coords[0], d.coords[0])), T_GRID)
        mism += pc != tc
    T2 = unit_torus(2)
    PP = ProductSpace(T2, T2)
    block_ok = True
    for xl, yl, xr, yr in (("0,0", "1/2,0", "0,0", "1/3,1/4"), ("1/5,0", "1/5,0", "0,0", "1/2,1/2"),
                           ("0,1/3", "0,1/3", "1/4,0", "1/4,0")):
        cfg_l, cfg_r = Configuration(T2.point(xl), T2.point(yl)), Configuration(T2.point(xr), T2.point(yr))
        Bl, Br = T2.midpoint_blocking_set(cfg_l), T2.midpoint_blocking_set(cfg_r)
        assert verify_blocking_finite(T2, cfg_l, Bl, 6).blocked
        assert verify_blocking_finite(T2, cfg_r, Br, 6).blocked
        cfg = Configuration((cfg_l.x, cfg_r.x), (cfg_l.y, cfg_r.y))
        B = PP.product_blocking_set(cfg, Bl, Br)
        block_ok &= verify_blocking_finite(PP, cfg, B, 6).blocked
    acceptance.record(10, mism == 0 and block_ok,
                      f"S1xS1 vs 2-torus, 25 configs, T<=20: {mism} mismatching curves; "
                      f"product blocking sets block at T=6: {block_ok}")


# 11 ------------------------------------------------------------------------------
def _run(args, cwd):
    return subprocess.run([sys.executable, "-m", "geosecure.cli", *args], cwd=cwd,
                          capture_output=True, text=True, check=True)


def test_c11_determinism(acceptance, tmp_path):
    (tmp_path / "torus.json").write_text('{"type":"torus","basis":[["1","0"],["0","1"]]}')
    (tmp_path / "b.json").write_text('["c3","c4","c5"]')
    commands = {
        "curve.csv": ["count", "--space", "torus.json", "--x", "0,0", "--y", "1/2,0",
                      "--tmax", "10", "--step", "0.5"],
        "cert.json": ["block", "certify", "--space", "torus.json", "--x", "0,0", "--y", "1/2,0"],
        "mane.json": ["entropy", "mane", "--space", "torus.json", "--samples", "100", "--seed", "7",
                      "--tmin", "4", "--tmax", "8", "--step", "1"],
        "ins.json": ["insecure", "--space", "genus2", "--x", "c0", "--y", "c1", "--blockers", "b.json",
                     "--tmax", "6", "--step", "2"],
        "hcurve.csv": ["count", "--space", "genus2", "--x", "c1", "--y", "c2", "--tmax", "6"],
    }
    same = []
    for name, args in commands.items():
        blobs = []
        for rep in range(2):
            out = tmp_path / f"{rep}_{name}"
            _run([*args, "--out", str(out)], tmp_path)
            blobs.append(out.read_bytes())
        same.append(blobs[0] == blobs[1] and len(blobs[0]) > 0)
    acceptance.record(11, all(same), f"{sum(same)}/{len(same)} commands byte-identical across two runs")
