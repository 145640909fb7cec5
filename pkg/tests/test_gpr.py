import math
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_kernel, brute_posterior, gauss_solve, kernel_mp, matern_bessel

from pevgp import gpr
from pevgp.errors import DimensionMismatch
from pevgp.gpr import GPModel, Hyperparameters, KernelKind, OptimizerConfig
from pevgp.numkernel import cholesky_spd

KINDS = list(KernelKind)


def theta(d=1, sf=1.0, ell=1.0, sn=0.0, coeffs=None):
    return Hyperparameters(tuple(coeffs) if coeffs is not None else (0.0,) * (d + 1), sf, ell, sn)


class TestKernelKind:
    @pytest.mark.parametrize("name,kind", [("SE", KernelKind.SE), ("exponential", KernelKind.EXP),
                                           ("Matern-3/2", KernelKind.MATERN32), ("matern52", KernelKind.MATERN52)])
    def test_parse(self, name, kind):
        assert KernelKind.parse(name) is kind

    def test_unknown_lists_choices(self):
        with pytest.raises(ValueError, match="se, exp, matern32, matern52"):
            KernelKind.parse("cosine")


class TestHyperparameters:
    def test_vector_round_trip(self):
        t = Hyperparameters((1.0, 2.0, 3.0), 0.5, 0.25, 1e-3)
        assert Hyperparameters.from_vector(t.as_vector()) == t and t.dim == 2

    @pytest.mark.parametrize("kw", [dict(signal_std=0.0), dict(length_scale=-1.0), dict(noise_std=-1e-3),
                                    dict(length_scale=math.inf)])
    def test_validation(self, kw):
        base = dict(mean_coeffs=(0.0, 0.0), signal_std=1.0, length_scale=1.0, noise_std=0.0)
        with pytest.raises(ValueError):
            Hyperparameters(**{**base, **kw})

    def test_mean(self):
        np.testing.assert_allclose(theta(2, coeffs=(1, 2, 3)).mean([[1.0, 1.0], [0.0, 2.0]]), [6, 7])


class TestKernels:
    @pytest.mark.parametrize("kind", KINDS)
    def test_zero_distance(self, kind):
        assert gpr.kernel_eval(kind, theta(sf=1.7, ell=0.3), 0.4, 0.4) == pytest.approx(1.7**2, rel=1e-15)

    def test_exponential_value(self):
        v = gpr.kernel_eval(KernelKind.EXP, theta(sf=2.0), 0.0, 1.0)
        assert v == pytest.approx(kernel_mp("exp", 2, 1, 1), rel=1e-15)
        assert v == pytest.approx(1.471518, rel=1e-6)

    @given(st.sampled_from(KINDS), st.floats(0.1, 5), st.floats(0.05, 5), st.floats(0, 10))
    def test_high_precision(self, kind, sf, ell, r):
        got = gpr.kernel_eval(kind, theta(sf=sf, ell=ell), 0.0, r)
        assert got == pytest.approx(kernel_mp(kind.value, sf, ell, r), rel=1e-13, abs=1e-300)

    @given(st.floats(0.1, 5), st.floats(0.05, 5), st.floats(1e-6, 10))
    def test_matern_half_is_exponential(self, sf, ell, r):
        exp = gpr.kernel_eval(KernelKind.EXP, theta(sf=sf, ell=ell), 0.0, r)
        assert matern_bessel(0.5, sf, ell, r) == pytest.approx(exp, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("nu,kind", [(1.5, KernelKind.MATERN32), (2.5, KernelKind.MATERN52)])
    @pytest.mark.parametrize("r", [1e-3, 0.1, 0.7, 2.0, 6.0])
    def test_matern_bessel_form(self, nu, kind, r):
        got = gpr.kernel_eval(kind, theta(sf=1.3, ell=0.8), [0.0], [r])
        assert got == pytest.approx(matern_bessel(nu, 1.3, 0.8, r), rel=1e-10)

    def test_isotropic_2d(self):
        t = theta(2, sf=1.0, ell=0.5)
        assert gpr.kernel_eval(KernelKind.SE, t, [0, 0], [0.3, 0.4]) == pytest.approx(math.exp(-0.5 * 1.0), rel=1e-14)

    def test_matrix_entrywise(self, rng):
        X = rng.uniform(-2, 2, 5)
        K = gpr.kernel_matrix(KernelKind.SE, theta(sf=1.5, ell=0.7), X, X)
        oracle = [[1.5**2 * math.exp(-0.5 * ((a - b) / 0.7) ** 2) for b in X] for a in X]
        np.testing.assert_allclose(K, oracle, rtol=1e-14)

    def test_gram_single(self):
        G = gpr.gram(KernelKind.MATERN32, theta(sf=2.0, sn=0.1), [0.3])
        np.testing.assert_allclose(G, [[4.01]], rtol=1e-15)

    def test_duplicate_inputs_jitter(self):
        m = gpr.posterior(KernelKind.SE, theta(), [0.5, 0.5], [1.0, 1.0])
        assert m.jitter > 0
        mean, _ = gpr.predict(m, [0.5])
        assert mean[0] == pytest.approx(1.0, rel=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gpr.kernel_matrix(KernelKind.SE, theta(2), np.ones((3, 3)), np.ones((2, 2)))


class TestLikelihood:
    def test_single_point(self):
        v = gpr.log_marginal_likelihood(KernelKind.SE, theta(coeffs=(2.0, 0.0)), [0.1], [2.0])
        assert v == pytest.approx(-0.5 * math.log(2 * math.pi), rel=1e-15)

    @pytest.mark.parametrize("kind", KINDS)
    def test_against_elimination(self, kind, rng):
        X = rng.uniform(0, 3, (6, 1))
        y = rng.standard_normal(6)
        t = theta(coeffs=(0.3, -0.2), sf=1.2, ell=0.9, sn=0.05)
        _, _, lml = brute_posterior(kind.value, t.mean_coeffs, 1.2, 0.9, 0.05, X, y, X[:1])
        assert gpr.log_marginal_likelihood(kind, t, X, y) == pytest.approx(lml, rel=1e-10, abs=1e-10)

    def test_quadratic_homogeneity(self, rng):
        X = rng.uniform(0, 1, (5, 1))
        r = rng.standard_normal(5)
        t = theta(sf=1.0, ell=0.4, sn=0.1)
        lml1 = gpr.log_marginal_likelihood(KernelKind.EXP, t, X, r)
        lml10 = gpr.log_marginal_likelihood(KernelKind.EXP, t, X, 10 * r)
        const = gpr.log_marginal_likelihood(KernelKind.EXP, t, X, 0 * r)
        assert (lml10 - const) == pytest.approx(100 * (lml1 - const), rel=1e-12)


class TestPredict:
    def test_two_point_example(self):
        X, y = [[0.0], [1.0]], [0.0, 1.0]
        m = gpr.posterior(KernelKind.SE, theta(), X, y)
        mean, var = gpr.predict(m, [0.5])
        # independent oracle: solve K a = y and K b = k* by elimination
        e = math.exp(-0.5)
        ks = [math.exp(-0.125)] * 2
        a = gauss_solve([[1, e], [e, 1]], y)
        b = gauss_solve([[1, e], [e, 1]], ks)
        assert mean[0] == pytest.approx(float(np.dot(ks, a)), rel=1e-14)
        assert var[0] == pytest.approx(1 - float(np.dot(ks, b)), rel=1e-12)
        assert mean[0] == pytest.approx(0.5494, abs=1e-4) and var[0] == pytest.approx(0.0304, abs=1e-4)

    @pytest.mark.parametrize("kind", KINDS)
    def test_interpolates(self, kind, rng):
        X = np.sort(rng.uniform(0, 2, 6))[:, None]
        y = np.sin(3 * X[:, 0])
        m = gpr.posterior(kind, theta(sf=1.0, ell=0.5), X, y)
        mean, var = gpr.predict(m, X)
        np.testing.assert_allclose(mean, y, atol=1e-8)
        assert np.all(var <= 1e-8)

    def test_single_point(self):
        m = gpr.posterior(KernelKind.MATERN52, theta(coeffs=(1.0, 0.5)), [0.2], [3.0])
        assert gpr.predict(m, [0.2])[0][0] == pytest.approx(3.0, abs=1e-8)

    def test_prior_reversion(self):
        t = theta(coeffs=(1.0, 0.5), sf=0.8, ell=0.1)
        m = gpr.posterior(KernelKind.EXP, t, [[0.0], [0.05]], [4.0, -3.0])
        far = 0.05 + 50 * 0.1
        mean, var = gpr.predict(m, [far])
        assert abs(mean[0] - t.mean([far])[0]) <= 1e-10 * 0.8
        assert var[0] >= 0.8**2 * (1 - 1e-8)

    def test_shape(self):
        m = gpr.posterior(KernelKind.SE, theta(2), [[0, 0], [1, 1]], [0.0, 1.0])
        mean, var = gpr.predict(m, [0.5, 0.5, 0.2, 0.1])
        assert mean.shape == var.shape == (2,)

    def test_clamp_counted(self):
        # a factor of K/2 in place of K drives the variance at the data negative
        X = np.array([[0.0], [1.0]])
        t = theta()
        F = cholesky_spd(0.5 * gpr.gram(KernelKind.SE, t, X))
        m = GPModel(KernelKind.SE, t, X, np.zeros(2), F, np.zeros(2))
        _, var = gpr.predict(m, X)
        np.testing.assert_array_equal(var, 0.0)
        assert m.clamped == 2


class TestConfidence:
    def test_standard(self):
        lo, hi = gpr.confidence_interval(0.0, 1.0)
        assert (lo, hi) == (pytest.approx(-1.959964, abs=1e-6), pytest.approx(1.959964, abs=1e-6))

    def test_zero_variance(self):
        assert gpr.confidence_interval(3.0, 0.0) == (3.0, 3.0)

    def test_scaled(self):
        lo, hi = gpr.confidence_interval(5.0, 4.0)
        z = NormalDist().inv_cdf(0.975)
        assert lo == pytest.approx(5 - 2 * z, abs=1e-12) and hi == pytest.approx(5 + 2 * z, abs=1e-12)
        assert lo == pytest.approx(1.080072, abs=1e-6)

    def test_bad_level(self):
        with pytest.raises(ValueError):
            gpr.confidence_interval(0.0, 1.0, level=1.0)


class TestFit:
    @pytest.mark.parametrize("kind", KINDS)
    def test_linear_data(self, kind):
        X = np.linspace(0, 1, 10)[:, None]
        m = gpr.fit(X, 2 + 3 * X[:, 0], kind)
        Xs = np.array([[0.05], [0.33], [0.91]])
        np.testing.assert_allclose(gpr.predict(m, Xs)[0], 2 + 3 * Xs[:, 0], rtol=1e-6)

    def test_linear_data_2d(self):
        X = np.array([[a, b] for a in np.linspace(0, 1, 4) for b in np.linspace(0, 1, 4)])
        y = 1 - X[:, 0] + 2 * X[:, 1]
        m = gpr.fit(X, y, KernelKind.MATERN32)
        np.testing.assert_allclose(gpr.predict(m, [0.4, 0.7])[0], 1 - 0.4 + 1.4, rtol=1e-6)

    def test_constant_data(self):
        m = gpr.fit([[0.0], [1.0], [2.0]], [5.0, 5.0, 5.0], KernelKind.SE)
        assert m.diagnostics["degenerate"]
        np.testing.assert_allclose(gpr.predict(m, [0.5, 7.0])[0], 5.0)

    def test_rank_deficient_design(self):
        # every input identical in the second coordinate: the slope there is not identifiable
        X = np.column_stack([np.linspace(0, 1, 6), np.full(6, 0.3)])
        m = gpr.fit(X, np.sin(X[:, 0]), KernelKind.SE)
        assert m.theta.mean_coeffs[2] == 0.0

    def test_deterministic_and_seeded(self):
        X = np.linspace(0, 2, 9)[:, None]
        y = np.abs(X[:, 0] - 0.9)
        a = gpr.fit(X, y, KernelKind.MATERN32, OptimizerConfig(seed=3))
        b = gpr.fit(X, y, KernelKind.MATERN32, OptimizerConfig(seed=3))
        assert a.theta == b.theta and a.diagnostics == b.diagnostics
        assert len(a.diagnostics["restarts"]) == 5

    def test_likelihood_is_best_restart(self):
        X = np.linspace(0, 2, 9)[:, None]
        m = gpr.fit(X, np.cos(2 * X[:, 0]), KernelKind.SE)
        best = max(r["log_likelihood"] for r in m.diagnostics["restarts"])
        assert m.diagnostics["log_likelihood"] == best
        lml = gpr.log_marginal_likelihood(KernelKind.SE, m.theta, X, np.cos(2 * X[:, 0]))
        assert lml == pytest.approx(best, rel=1e-8)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gpr.fit([[0.0], [1.0]], [1.0], KernelKind.SE)

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            gpr.fit([[0.0], [1.0]], [1.0, math.nan], KernelKind.SE)


def test_brute_kernel_matches_library(rng):
    X = rng.uniform(0, 1, (4, 2))
    for kind in KINDS:
        np.testing.assert_allclose(gpr.kernel_matrix(kind, theta(2, sf=0.7, ell=0.3), X, X),
                                   brute_kernel(kind.value, 0.7, 0.3, X, X), rtol=1e-13)
