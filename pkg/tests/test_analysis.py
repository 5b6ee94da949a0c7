from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geosecure.analysis import (BoundCheck, GrowthFit, InsufficientDataError, ball_volume,
                                berger_bott_check, check_curve, check_entropy_window,
                                check_mn_bound, check_split_bound, check_uniform_security_bound,
                                fit_growth, mane_estimate)
from geosecure.core import Configuration, CountCurve, UnsupportedSpaceError, count_curve
from geosecure.flat_torus import unit_torus
from geosecure.product import product_space

U = unit_torus(2)


def curve_from(grid, n, m=None):
    return CountCurve(Configuration(0, 0), list(grid), list(n), list(m if m is not None else n))


class TestBounds:
    def test_mn_examples(self):
        ok = check_mn_bound(8, 6, F(3, 2), delta_sq=F(1, 4))
        assert ok.satisfied and ok.rhs == F(27, 2)
        bad = check_mn_bound(5, 6, 3, delta=F(1, 2))
        assert not bad.satisfied and "m_T exceeds n_T" in bad.flags and bad.lhs > bad.rhs

    def test_mn_below_twice_delta(self):
        # n = m = 2 at T = 1/2 on the unit torus: the fiber factor is 1/4
        c = check_mn_bound(2, 2, F(1, 2), delta=F(1, 2))
        assert not c.satisfied and any("T < 2*delta" in f for f in c.flags)

    def test_mn_on_unit_torus_from_2delta(self):
        curve = count_curve(U, Configuration("0,0", "1/3,1/5"), [1, 2, 3, 4, 6])
        assert all(c.satisfied for c in check_curve(curve, "mn", delta_sq=F(1, 4)))

    def test_split(self):
        assert check_split_bound(3, 2, 1).satisfied
        assert not check_split_bound(4, 2, 1).satisfied

    def test_uniform_security(self):
        c = check_uniform_security_bound(100, 4, 0.5, 4)
        assert c.strict and c.satisfied
        assert math.isclose(c.rhs, 2 * 8 ** 5)
        assert math.isclose(c.extra["m_bound"], 8 * 8 ** 3)
        assert not check_uniform_security_bound(10 ** 6, 2, 1, 1).satisfied
        with pytest.raises(ValueError):
            check_uniform_security_bound(1, 1, 1, 0)

    def test_entropy_window(self):
        grid = [4, 5, 6, 7, 8]
        curve = curve_from(grid, [round(math.exp(t)) for t in grid])
        assert check_entropy_window(curve, 0.9, 1.1).satisfied
        tight = check_entropy_window(curve, 1.05, 1.5)
        assert not tight.satisfied and tight.lhs > 0
        wide = check_entropy_window(curve, 0.5, 1.1)
        assert wide.flags and wide.satisfied

    def test_invariant_enforced(self):
        with pytest.raises(ValueError):
            BoundCheck("x", {}, 2, 1, True)
        with pytest.raises(ValueError):
            BoundCheck("x", {}, 1, 1, True, strict=True)

    def test_to_dict_is_plain(self):
        d = check_mn_bound(8, 6, F(3, 2), delta_sq=F(1, 4)).to_dict()
        assert d["rhs"] == "27/2" and d["inputs"]["T"] == "3/2"


class TestFits:
    def test_polynomial_degree(self):
        grid = list(range(5, 41, 5))
        curve = curve_from(grid, [3 * t * t for t in grid])
        fit = fit_growth(curve, "polynomial")
        assert math.isclose(fit.parameter, 2, abs_tol=1e-9) and fit.residual < 1e-12
        assert fit.window == (25.0, 40.0)

    def test_exponential_rate(self):
        grid = list(range(1, 11))
        curve = curve_from(grid, [round(5 * math.exp(0.7 * t)) for t in grid])
        fit = fit_growth(curve, "exponential", window=(1, 10))
        assert abs(fit.parameter - 0.7) < 1e-2

    @settings(max_examples=25)
    @given(st.floats(0.5, 4), st.integers(2, 50))
    def test_scale_equivariance(self, d, c):
        grid = [2, 4, 6, 8, 10, 12]
        n = [max(1, round(c * t ** d)) for t in grid]
        a = fit_growth(curve_from(grid, n), "polynomial")
        b = fit_growth(curve_from(grid, [7 * v for v in n], [7 * v for v in n]), "polynomial")
        assert math.isclose(a.parameter, b.parameter, abs_tol=1e-9)

    def test_zero_counts_dropped(self):
        fit = fit_growth(curve_from([1, 2, 3, 4, 5, 6], [0, 0, 1, 2, 3, 4]), "polynomial", (1, 6))
        assert fit.dropped == [1, 2]

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            fit_growth(curve_from([1, 2, 3], [1, 2, 3]))
        with pytest.raises(InsufficientDataError):
            fit_growth(curve_from([1, 2, 3, 4, 5], [0, 0, 1, 2, 3]))
        with pytest.raises(ValueError):
            GrowthFit("cubic", 1.0, 0.0, (1, 2))


class TestMonteCarlo:
    def test_mane_deterministic(self):
        a = mane_estimate(U, 100, [4, 6, 8, 10], 7)
        b = mane_estimate(U, 100, [4, 6, 8, 10], 7)
        assert a.parameter == b.parameter and a.meta == b.meta

    def test_mane_seeds_agree_within_error(self):
        a = mane_estimate(U, 200, [4, 6, 8, 10], 1)
        b = mane_estimate(U, 200, [4, 6, 8, 10], 2)
        for va, vb, sa, sb in zip(a.meta["average"], b.meta["average"],
                                  a.meta["average_se"], b.meta["average_se"]):
            assert abs(va - vb) <= 3 * math.hypot(sa, sb)

    def test_mane_torus_averages_match_area(self):
        # on the unit torus the averaged count is about pi T^2
        fit = mane_estimate(U, 200, [6, 8, 10], 3, window=(6, 10))
        for T, v in zip(fit.meta["grid"], fit.meta["average"]):
            assert abs(v - math.pi * T * T) / (math.pi * T * T) < 0.05

    def test_mane_sample_floor(self):
        with pytest.raises(ValueError):
            mane_estimate(U, 50, [1, 2], 0)

    def test_ball_volume(self):
        assert math.isclose(ball_volume(U, 2), 4 * math.pi)
        assert math.isclose(ball_volume(unit_torus(3), 1), 4 / 3 * math.pi)

    def test_berger_bott_torus(self):
        c = berger_bott_check(U, "0,0", 10, sample_count=200, rng_seed=0)
        assert c.satisfied and c.extra["relative_error"] < 0.02

    def test_berger_bott_unsupported(self):
        with pytest.raises(UnsupportedSpaceError):
            berger_bott_check(product_space(unit_torus(1), unit_torus(1)), "0|0", 3)


def test_check_curve_names():
    curve = curve_from([1, 2], [4, 12])
    assert len(check_curve(curve, "uniform-security", delta=0.5, s=4)) == 2
    with pytest.raises(ValueError):
        check_curve(curve, "nope")
    assert np.isfinite(check_curve(curve, "entropy-window", h1=0.5, h2=2)[0].lhs)
