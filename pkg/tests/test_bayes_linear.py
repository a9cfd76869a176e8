# -*- coding: utf-8 -*-
"""贝叶斯线性回归：共轭更新、抗漂移更新与预测分布"""

import numpy as np
import pytest

from bayes_linear import BayesLinearRegressor
from errors import SingularPrecisionError


def _one_dim(**kwargs):
    return BayesLinearRegressor(['x'], fit_intercept=False, **kwargs)


class TestStandardUpdate:

    def test_one_dimensional_step(self):
        model = _one_dim(alpha=1.0, beta=1.0)
        model.learn({'x': 1.0}, 1.0)
        assert model.cov[0, 0] == pytest.approx(0.5)
        assert model.mean[0] == pytest.approx(0.5)

    def test_matches_batch_posterior(self):
        rng = np.random.default_rng(0)
        names = [f"f{i}" for i in range(8)]
        alpha, beta = 1.0, 2.0
        model = BayesLinearRegressor(names, alpha=alpha, beta=beta, fit_intercept=False)
        X = rng.normal(size=(500, 8))
        y = X @ rng.normal(size=8) + rng.normal(0, 0.5, size=500)
        for row, target in zip(X, y):
            model.learn(dict(zip(names, map(float, row))), float(target))
        S = np.linalg.inv(alpha * np.eye(8) + beta * X.T @ X)
        m = S @ (beta * X.T @ y)
        assert np.max(np.abs(model.cov - S)) < 1e-8
        assert np.max(np.abs(model.mean - m)) < 1e-8

    def test_zero_vector_leaves_state(self):
        model = _one_dim()
        model.learn({'x': 2.0}, 1.0)
        mean, cov = model.mean.copy(), model.cov.copy()
        model.learn({'x': 0.0}, 50.0)
        np.testing.assert_array_equal(model.mean, mean)
        np.testing.assert_array_equal(model.cov, cov)

    def test_variance_decreases_for_repeated_input(self):
        model = BayesLinearRegressor(['a', 'b'])
        x = {'a': 0.7, 'b': -1.1}
        previous = model.predictive(x)[1]
        for _ in range(100):
            model.learn(x, 1.0)
            current = model.predictive(x)[1]
            assert current < previous
            previous = current

    def test_intercept_learned(self):
        model = BayesLinearRegressor(['x'], alpha=1e-6)
        for x in np.linspace(-1, 1, 50):
            model.learn({'x': float(x)}, 3.0)
        assert model.predict({'x': 0.3}) == pytest.approx(3.0, abs=1e-3)


class TestDriftUpdate:

    def test_gamma_one_never_learns(self):
        rng = np.random.default_rng(1)
        model = BayesLinearRegressor(['a', 'b'], gamma=1.0)
        mean, cov = model.mean.copy(), model.cov.copy()
        for _ in range(100):
            model.learn({'a': float(rng.normal()), 'b': float(rng.normal())}, float(rng.normal()))
        assert np.array_equal(model.mean, mean)
        assert np.array_equal(model.cov, cov)

    def test_gamma_zero_memorizes_last_sample(self):
        model = _one_dim(gamma=0.0)
        model.learn({'x': 1.0}, 2.0)
        model.learn({'x': 1.0}, 5.0)
        assert model.cov[0, 0] == 1.0
        assert model.mean[0] == 5.0

    def test_half_smoothing_example(self):
        model = _one_dim(alpha=1.0, beta=1.0, gamma=0.5)
        model.learn({'x': 1.0}, 2.0)
        assert model.precision[0, 0] == pytest.approx(1.0)
        assert model.cov[0, 0] == pytest.approx(1.0)
        assert model.mean[0] == pytest.approx(1.0)

    def test_gamma_zero_with_zero_input(self):
        model = _one_dim(gamma=0.0)
        with pytest.raises(SingularPrecisionError):
            model.learn({'x': 0.0}, 1.0)

    def test_tracks_shifted_target(self):
        model = BayesLinearRegressor(['x'], gamma=0.7)
        for _ in range(50):
            model.learn({'x': 1.0}, 1.0)
        for _ in range(50):
            model.learn({'x': 1.0}, -2.0)
        assert model.predict({'x': 1.0}) == pytest.approx(-2.0, abs=0.05)

    def test_degenerate_directions_stay_finite(self):
        # 只在一个方向上有信息时，其他方向的精度按 γ 衰减
        model = BayesLinearRegressor(['a', 'b'], gamma=0.5, fit_intercept=False)
        for _ in range(200):
            model.learn({'a': 1.0, 'b': 0.0}, 1.0)
        mean, variance = model.predictive({'a': 1.0, 'b': 1.0})
        assert np.isfinite(mean) and np.isfinite(variance)
        assert model.covariance_refreshes > 0

    def test_gamma_out_of_range(self):
        with pytest.raises(ValueError):
            _one_dim(gamma=1.5)


class TestPredictive:

    def test_fresh_state(self):
        model = _one_dim(alpha=2.0, beta=4.0)
        mean, variance = model.predictive({'x': 3.0})
        assert mean == 0.0
        assert variance == pytest.approx(1 / 4.0 + 9.0 / 2.0)

    def test_zero_input(self):
        model = _one_dim(beta=4.0)
        model.learn({'x': 1.0}, 3.0)
        assert model.predictive({'x': 0.0}) == (0.0, pytest.approx(0.25))

    def test_intercept_adds_bias_term(self):
        model = BayesLinearRegressor(['x'], alpha=1.0, beta=1.0)
        assert model.predictive({'x': 2.0})[1] == pytest.approx(1.0 + 4.0 + 1.0)
