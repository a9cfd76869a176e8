#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
贝叶斯线性回归
高斯共轭先验 m0 = 0, S0 = α⁻¹I，噪声精度 β。
标准更新: S' = (S⁻¹ + β xᵀx)⁻¹, m' = S'(S⁻¹m + β x y)
抗漂移更新: S' = (γ S⁻¹ + (1−γ) β xᵀx)⁻¹, m' = S'(γ S⁻¹m + (1−γ) β x y)
精度矩阵 P 与信息向量 h = P m 精确维护，协方差用 Sherman–Morrison 做秩一更新
"""

import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from errors import SingularPrecisionError
from learners import FeatureVector, FixedIndexMixin, Regressor, check_features

BIAS = 'bias'


class BayesLinearRegressor(FixedIndexMixin, Regressor):
    """gamma 为 None 时使用标准共轭更新，否则使用 γ 平滑的抗漂移更新"""

    input_view = 'dense'
    needs_feature_names = True

    def __init__(self, feature_names: Sequence[str], alpha: float = 1.0, beta: float = 1.0,
                 gamma: Optional[float] = None, fit_intercept: bool = True, variance_cap: float = 1e10):
        if gamma is not None and not 0.0 <= gamma <= 1.0:
            raise ValueError(f"γ 必须在 [0, 1] 内，实际为 {gamma}")
        if not alpha > 0 or not beta > 0:
            raise ValueError("α 和 β 必须大于 0")
        names = list(feature_names) + ([BIAS] if fit_intercept else [])
        self._init_index(names)
        self.fit_intercept = fit_intercept
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.gamma = gamma
        self.variance_cap = float(variance_cap)
        d = len(names)
        self.mean = np.zeros(d)
        self.cov = np.eye(d) / self.alpha
        self.precision = np.eye(d) * self.alpha
        self.info = np.zeros(d)
        self.covariance_refreshes = 0
        self.resymmetrizations = 0
        self._degraded = False
        self.logger = logging.getLogger(__name__)

    def _design(self, x: FeatureVector, count_ignored: bool = False) -> np.ndarray:
        a = self._vector({k: v for k, v in x.items() if k != BIAS}, count_ignored)
        if self.fit_intercept:
            a[self.index[BIAS]] = 1.0
        return a

    def predictive(self, x: FeatureVector) -> Tuple[float, float]:
        """预测分布: μ = m·x, σ² = 1/β + xᵀ S x"""
        a = self._design(x)
        return float(self.mean @ a), float(1.0 / self.beta + a @ self.cov @ a)

    def predict(self, x: FeatureVector) -> float:
        return self.predictive(x)[0]

    def learn(self, x: FeatureVector, y: float) -> None:
        check_features(x, y)
        a = self._design(x, count_ignored=True)
        if self.gamma is None:
            self.learn_standard(a, y)
        else:
            self.learn_drift(a, y)

    def learn_standard(self, a: np.ndarray, y: float) -> None:
        if not np.any(a):
            return
        self.precision = self.precision + self.beta * np.outer(a, a)
        self.info = self.info + self.beta * a * y
        self._rank_one(self.cov, self.beta, a)

    def learn_drift(self, a: np.ndarray, y: float) -> None:
        gamma = self.gamma
        weight = (1.0 - gamma) * self.beta
        if gamma == 1.0:
            return
        if gamma == 0.0 and not np.any(a):
            raise SingularPrecisionError("γ = 0 且 x 为零向量时精度矩阵奇异")
        self.precision = gamma * self.precision + weight * np.outer(a, a)
        self.info = gamma * self.info + weight * a * y
        if gamma == 0.0:
            self._refresh()
            return
        self._rank_one(self.cov / gamma, weight, a)

    def _rank_one(self, base: np.ndarray, weight: float, a: np.ndarray) -> None:
        """S' = B − w (B a)(B a)ᵀ / (1 + w aᵀ B a)；数值变坏时改用精度矩阵的特征分解"""
        if self._degraded:
            self._refresh()
            return
        Ba = base @ a
        cov = base - weight * np.outer(Ba, Ba) / (1.0 + weight * (a @ Ba))
        cov = (cov + cov.T) / 2.0
        diag = np.diag(cov)
        if not np.all(np.isfinite(cov)) or diag.max() > self.variance_cap:
            self._refresh()
            return
        if diag.min() <= 0.0:
            self.resymmetrizations += 1
            self.logger.warning("协方差矩阵失去正定性，改用精度矩阵重新计算")
            self._refresh()
            return
        self.cov = cov
        self.mean = cov @ self.info

    def _refresh(self) -> None:
        """用特征分解求精度矩阵的伪逆，截断阈值为最大特征值的 1e-10 倍"""
        eigvals, eigvecs = np.linalg.eigh((self.precision + self.precision.T) / 2.0)
        cutoff = max(eigvals.max(), 0.0) * 1e-10
        if eigvals.max() <= 0.0:
            raise SingularPrecisionError("精度矩阵没有正特征值")
        keep = eigvals > cutoff
        inverse = np.where(keep, 1.0 / np.where(keep, eigvals, 1.0), 0.0)
        self.cov = (eigvecs * inverse) @ eigvecs.T
        self.mean = self.cov @ self.info
        was_degraded = self._degraded
        self._degraded = not np.all(keep) or (1.0 / eigvals.min() if eigvals.min() > 0 else np.inf) > self.variance_cap
        self.covariance_refreshes += 1
        if self._degraded and not was_degraded:
            self.logger.warning("精度矩阵病态，协方差改为按特征分解计算")
        elif was_degraded and not self._degraded:
            self.logger.info("精度矩阵恢复良态，协方差回到 Sherman–Morrison 更新")

    def diagnostics(self) -> Dict[str, Any]:
        return {
            'ignored_features': self.ignored_features,
            'covariance_refreshes': self.covariance_refreshes,
            'resymmetrizations': self.resymmetrizations,
        }

    def to_dict(self) -> Dict[str, Any]:
        names = [n for n in self.feature_names if n != BIAS] if self.fit_intercept else self.feature_names
        return {
            'feature_names': names, 'alpha': self.alpha, 'beta': self.beta, 'gamma': self.gamma,
            'fit_intercept': self.fit_intercept, 'variance_cap': self.variance_cap,
            'mean': self.mean.tolist(), 'cov': self.cov.tolist(), 'precision': self.precision.tolist(),
            'info': self.info.tolist(), 'ignored_features': self.ignored_features,
            'covariance_refreshes': self.covariance_refreshes, 'resymmetrizations': self.resymmetrizations,
            'degraded': self._degraded,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BayesLinearRegressor':
        model = cls(data['feature_names'], data['alpha'], data['beta'], data['gamma'],
                    data['fit_intercept'], data['variance_cap'])
        model.mean = np.asarray(data['mean'], dtype=float)
        model.cov = np.asarray(data['cov'], dtype=float)
        model.precision = np.asarray(data['precision'], dtype=float)
        model.info = np.asarray(data['info'], dtype=float)
        model.ignored_features = int(data['ignored_features'])
        model.covariance_refreshes = int(data['covariance_refreshes'])
        model.resymmetrizations = int(data['resymmetrizations'])
        model._degraded = bool(data['degraded'])
        return model
