import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import natural_spline_moments
from scipy.interpolate import CubicSpline

from pevgp.baselines import (
    GRID_G,
    BenchCase,
    cubic_spline_eval,
    cubic_spline_fit,
    linear_interp,
    spline_vs_gpr_experiment,
    test_function,
)
from pevgp.errors import DuplicateKnots, OutOfDomain

knots_st = st.lists(st.floats(-10, 10), min_size=2, max_size=10, unique=True).map(sorted).filter(
    lambda k: np.min(np.diff(k)) > 1e-3)


class TestLinear:
    def test_midpoint(self):
        assert linear_interp([0, 1], [0, 2], 0.5) == 1.0

    def test_knots(self, rng):
        x = np.sort(rng.uniform(0, 5, 6))
        y = rng.standard_normal(6)
        np.testing.assert_array_equal(linear_interp(x, y, x), y)

    def test_two_point_form(self, rng):
        x = np.sort(rng.uniform(0, 5, 6))
        y = rng.standard_normal(6)
        q = rng.uniform(x[0], x[-1], 20)
        oracle = []
        for t in q:
            i = max(k for k in range(5) if x[k] <= t)
            oracle.append(y[i] + (y[i + 1] - y[i]) * (t - x[i]) / (x[i + 1] - x[i]))
        np.testing.assert_allclose(linear_interp(x, y, q), oracle, atol=1e-14)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            linear_interp([0, 1], [0, 1], 1.5)

    def test_duplicate_knots(self):
        with pytest.raises(DuplicateKnots):
            linear_interp([0, 1, 1], [0, 1, 2], 0.5)


class TestCubic:
    def test_two_knots_is_line(self):
        s = cubic_spline_fit([1.0, 3.0], [2.0, 6.0])
        np.testing.assert_allclose(cubic_spline_eval(s, [1.5, 2.9]), [3.0, 5.8], atol=1e-14)

    @given(knots_st, st.floats(-3, 3), st.floats(-3, 3))
    def test_reproduces_lines(self, knots, a, b):
        x = np.array(knots)
        s = cubic_spline_fit(x, a + b * x)
        q = np.linspace(x[0], x[-1], 17)
        np.testing.assert_allclose(cubic_spline_eval(s, q), a + b * q, atol=1e-12 * (1 + abs(a) + 10 * abs(b)))

    def test_interpolates(self, rng):
        x = np.sort(rng.uniform(0, 5, 7))
        y = rng.standard_normal(7)
        np.testing.assert_allclose(cubic_spline_eval(cubic_spline_fit(x, y), x), y, atol=1e-13)

    def test_moments_against_elimination(self, rng):
        x = np.sort(rng.uniform(0, 5, 5))
        y = rng.standard_normal(5)
        s = cubic_spline_fit(x, y)
        np.testing.assert_allclose(s.moments, natural_spline_moments(x, y), atol=1e-10)
        # second derivative is continuous at interior knots
        h = np.diff(x)
        left = 2 * s.coeffs[:-1, 2] + 6 * s.coeffs[:-1, 3] * h[:-1]
        np.testing.assert_allclose(left, 2 * s.coeffs[1:, 2], atol=1e-10)

    @given(knots_st, st.integers(0, 2**31))
    def test_against_scipy_natural(self, knots, seed):
        x = np.array(knots)
        y = np.random.default_rng(seed).standard_normal(x.size)
        q = np.linspace(x[0], x[-1], 41)
        oracle = CubicSpline(x, y, bc_type="natural")(q)
        np.testing.assert_allclose(cubic_spline_eval(cubic_spline_fit(x, y), q), oracle, atol=1e-9)

    def test_horner_against_coefficients(self, rng):
        x = np.sort(rng.uniform(-2, 2, 8))
        s = cubic_spline_fit(x, np.sin(x))
        q = rng.uniform(x[0], x[-1], 100)
        oracle = []
        for t in q:
            i = min(int(np.searchsorted(x, t, side="right")) - 1, 6)
            a, b, c, d = s.coeffs[i]
            dt = t - x[i]
            oracle.append(a + b * dt + c * dt**2 + d * dt**3)
        np.testing.assert_allclose(cubic_spline_eval(s, q), oracle, atol=1e-13)

    def test_fourth_order(self):
        # sin has zero curvature at 0 and pi, so the natural end conditions are exact
        errs = []
        q = np.linspace(0, math.pi, 1001)
        for n in (16, 32):
            x = np.linspace(0, math.pi, n + 1)
            s = cubic_spline_fit(x, np.sin(x))
            errs.append(np.max(np.abs(cubic_spline_eval(s, q) - np.sin(q))))
        assert math.log2(errs[0] / errs[1]) == pytest.approx(4, abs=0.5)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            cubic_spline_eval(cubic_spline_fit([0, 1, 2], [0, 1, 0]), -0.1)


def test_function_at_zero():
    assert test_function(0.0) == 2.0
    assert test_function(math.pi) == pytest.approx(1.0, abs=1e-15)
    assert test_function(1.3) == pytest.approx(1 + math.sin(1.3) / 1.3, rel=1e-15)


@pytest.fixture(scope="module")
def case1():
    return spline_vs_gpr_experiment(BenchCase.UNIFORM_I)


class TestExperiment:
    def test_ordering(self, case1):
        for grid in ("1.0", "0.5"):
            mse = {r.method: r.mse for r in case1 if r.grid == grid}
            assert mse["gpr_se"] < mse["cubic_spline"] < mse["linear"]

    def test_monotone_in_h(self, case1):
        for method in ("gpr_se", "cubic_spline", "linear"):
            a, b = (r.mse for r in case1 if r.method == method)
            assert b <= a

    def test_single_step(self):
        rows = spline_vs_gpr_experiment(BenchCase.UNIFORM_I, steps=(1.0,))
        assert [r.method for r in rows] == ["gpr_se", "cubic_spline", "linear"]

    def test_case_two(self):
        rows = {r.method: r for r in spline_vs_gpr_experiment(BenchCase.NONUNIFORM_II)}
        assert all(r.grid == "G" for r in rows.values())
        assert math.isfinite(rows["gpr_se"].max_err)
        assert rows["gpr_se"].max_err < rows["linear"].max_err
        assert rows["linear"].excluded > 0 and rows["gpr_se"].excluded == 0
        assert GRID_G[-1] < 3 * math.pi

    def test_constant_function(self):
        rows = spline_vs_gpr_experiment(BenchCase.UNIFORM_I, steps=(1.0,), f=lambda x: np.full_like(x, 3.0))
        assert all(r.mse == 0.0 and r.max_err == 0.0 for r in rows)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            spline_vs_gpr_experiment(BenchCase.UNIFORM_I, steps=(0.0,))
