from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geosecure.core import (Configuration, CountCurve, SpaceMismatchError, count_connecting,
                            count_curve, count_joining, count_through, passage_times,
                            split_at_blocker, through_segments, trim_to_connecting)
from geosecure.flat_torus import unit_torus

from oracles import random_point, random_torus

U = unit_torus(2)


def seg(start, v):
    return U.segment(start, [F(c) for c in v])


class TestPassage:
    def test_through_start_point(self):
        rec = passage_times(seg("0,0", ("3/2", "0")), "0,0")
        assert list(rec.times) == [1.0]
        assert list(rec.params) == [F(2, 3)]

    def test_through_midpoint(self):
        assert list(passage_times(seg("0,0", ("3/2", "0")), "1/2,0").times) == [0.5]

    def test_primitive_vector_has_no_interior_hit(self):
        assert not passage_times(seg("0,0", (1, 0)), "0,0").times

    def test_space_mismatch(self):
        other = unit_torus(1)
        with pytest.raises(SpaceMismatchError):
            passage_times(seg("0,0", (1, 0)), "0,0", space=other)

    def test_scan_oracle(self):
        # brute force: sample the segment on a fine rational grid
        g = seg("1/3,0", ("6", "2"))
        grid = [F(k, 60) for k in range(1, 60)]
        for z in ("5/6,1/2", "1/3,0", "0,1/2", "1/3,1/2"):
            z = U.point(z)
            hits = [s for s in grid if U.point_at(g, s) == z]
            assert list(passage_times(g, z).params) == hits


class TestTrim:
    def test_long_segment_trims_to_short_one(self):
        g = trim_to_connecting(seg("0,0", ("3/2", "0")))
        assert U.displacement(g) == (F(1, 2), 0)
        assert g.length_sq == F(1, 4)

    def test_loop_trims_to_first_return(self):
        g = trim_to_connecting(seg("0,0", (2, 0)))
        assert U.displacement(g) == (1, 0)

    def test_idempotent_on_connecting(self):
        g = seg("0,0", ("1/2", "1"))
        assert trim_to_connecting(g) is g

    @given(st.integers(0, 10**6))
    def test_result_is_connecting(self, seed):
        rng = np.random.default_rng(seed)
        t = random_torus(rng, 2)
        cfg = Configuration(random_point(rng, 2), random_point(rng, 2))
        for g in t.enumerate_joining(cfg, 4):
            h = trim_to_connecting(g)
            assert h.start == cfg.x and h.end == cfg.y
            assert not t.passage_params(h, cfg.x) and not t.passage_params(h, cfg.y)
            assert h.length_sq <= g.length_sq


class TestSplit:
    def test_loop_split_at_midpoint(self):
        g = split_at_blocker(seg("0,0", (1, 0)), "1/2,0", 1)
        assert g.length_sq == F(1, 4) and g.end == U.point("1/2,0")

    def test_leftward_segment(self):
        g = split_at_blocker(seg("0,0", ("-3/4", "0")), "3/4,0", F(3, 4))
        assert g.length_sq == F(1, 16)
        assert g.start == U.point("0,0")

    def test_tie_goes_to_first_piece(self):
        g = split_at_blocker(seg("0,0", (1, 0)), "1/2,0", 1)
        assert g.start == U.point("0,0")

    def test_second_piece_when_first_is_long(self):
        # passage at s = 3/4: gamma_1 has length 3/4 > T/2, so gamma_2 is returned
        g = split_at_blocker(seg("0,0", (1, 0)), "3/4,0", 1)
        assert g.start == U.point("3/4,0") and g.end == U.point("0,0")
        assert g.length_sq == F(1, 16)

    def test_errors(self):
        with pytest.raises(ValueError):
            split_at_blocker(seg("0,0", (1, 0)), "0,0", 1)
        with pytest.raises(ValueError):
            split_at_blocker(seg("0,0", (1, 0)), "0,1/2", 1)


class TestCounters:
    def test_pinned_counts(self):
        cfg = Configuration("0,0", "1/2,0")
        assert count_joining(U, cfg, F(3, 2)) == 8
        assert count_connecting(U, cfg, F(3, 2)) == 6
        loop = Configuration("0,0", "0,0")
        assert count_joining(U, loop, F(1, 2)) == 0
        assert count_joining(U, loop, 1) == 4
        assert count_connecting(U, loop, 1) == 4

    def test_count_through(self):
        loop = Configuration("0,0", "0,0")
        assert count_through(U, loop, "1/2,0", 1) == 2
        assert count_through(U, loop, "0,1/2", 1) == 2
        assert count_through(U, loop, "1/3,1/3", 1) == 0
        with pytest.raises(ValueError):
            count_through(U, loop, "0,0", 1)

    def test_below_distance(self):
        assert count_joining(U, Configuration("0,0", "1/2,1/2"), F(1, 2)) == 0

    def test_nonpositive_T(self):
        with pytest.raises(ValueError):
            count_joining(U, Configuration("0,0", "0,0"), 0)

    @given(st.integers(0, 10**6))
    def test_swap_symmetry_and_monotone(self, seed):
        rng = np.random.default_rng(seed)
        t = random_torus(rng, 2)
        cfg = Configuration(random_point(rng, 2), random_point(rng, 2))
        grid = [1, 2, 3, 5, 8]
        a, b = count_curve(t, cfg, grid), count_curve(t, cfg.swapped(), grid)
        assert (a.n, a.m) == (b.n, b.m)
        assert a.n == sorted(a.n) and a.m == sorted(a.m)

    def test_through_segments_pass_z(self):
        cfg = Configuration("0,0", "1/2,0")
        z = U.point("1/4,0")
        for g in through_segments(U, cfg, z, 4):
            assert U.passage_params(g, z)


class TestCountCurve:
    def test_validation(self):
        cfg = Configuration(0, 0)
        with pytest.raises(ValueError):
            CountCurve(cfg, [1, 2], [1, 2], [2, 2])
        with pytest.raises(ValueError):
            CountCurve(cfg, [2, 1], [1, 2], [1, 1])
        with pytest.raises(ValueError):
            CountCurve(cfg, [1], [1, 2], [1, 1])
