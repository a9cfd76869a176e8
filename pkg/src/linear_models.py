#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
线性模型
随机梯度下降的在线线性回归、带二次交互项的变体，以及用正规方程一次拟合后冻结的批量对照模型
"""

import itertools
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import BatchFitError
from featurize import ONE_HOT_PREFIX
from learners import FeatureVector, Regressor, check_features, clip


class LinearSGD(Regressor):
    """ŷ = b + Σ w_j x_j，损失 ½(ŷ − y)²，常数学习率"""

    input_view = 'full'

    def __init__(self, learning_rate: float = 0.1, clip_gradient: Optional[float] = 10.0):
        self.learning_rate = float(learning_rate)
        self.clip_gradient = clip_gradient
        self.weights: Dict[str, float] = {}
        self.intercept = 0.0
        self.logger = logging.getLogger(__name__)

    def _expand(self, x: FeatureVector) -> FeatureVector:
        return x

    def predict(self, x: FeatureVector) -> float:
        x = self._expand(x)
        return self.intercept + sum(self.weights.get(name, 0.0) * value for name, value in x.items())

    def learn(self, x: FeatureVector, y: float) -> None:
        check_features(x, y)
        x = self._expand(x)
        error = self.intercept + sum(self.weights.get(name, 0.0) * value for name, value in x.items()) - y
        error = clip(error, self.clip_gradient)
        if error == 0.0:
            return
        step = self.learning_rate * error
        self.intercept -= step
        for name, value in x.items():
            self.weights[name] = self.weights.get(name, 0.0) - step * value

    def diagnostics(self) -> Dict[str, Any]:
        return {'n_weights': len(self.weights)}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'learning_rate': self.learning_rate,
            'clip_gradient': self.clip_gradient,
            'intercept': self.intercept,
            'weights': dict(self.weights),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LinearSGD':
        model = cls(data['learning_rate'], data['clip_gradient'])
        model.intercept = float(data['intercept'])
        model.weights = {k: float(v) for k, v in data['weights'].items()}
        return model


class PolynomialLinear(LinearSGD):
    """数值特征两两相乘（含平方项）后交给线性模型，one-hot 特征不参与交互"""

    def __init__(self, learning_rate: float = 0.01, clip_gradient: Optional[float] = 10.0):
        super().__init__(learning_rate, clip_gradient)

    def _expand(self, x: FeatureVector) -> FeatureVector:
        numeric = sorted(name for name in x if not name.startswith(ONE_HOT_PREFIX))
        expanded = dict(x)
        for a, b in itertools.combinations_with_replacement(numeric, 2):
            expanded[f"{a}*{b}"] = x[a] * x[b]
        return expanded


class BatchLinear(Regressor):
    """
    批量线性回归对照模型
    在预热样本上用带岭项的正规方程拟合一次，之后 learn 不做任何事
    """

    input_view = 'full'

    def __init__(self, ridge: float = 1e-6, refinement_steps: int = 3):
        self.ridge = float(ridge)
        self.refinement_steps = int(refinement_steps)
        self.weights: Dict[str, float] = {}
        self.intercept = 0.0
        self.fitted = False
        self.n_samples = 0
        self.logger = logging.getLogger(__name__)

    @property
    def trainable(self) -> bool:
        return not self.fitted

    def fit(self, samples: Sequence[Tuple[FeatureVector, float]]) -> 'BatchLinear':
        """求解 (XᵀX + λI) w = Xᵀy，再做几步迭代岭回归把岭项带来的偏差消掉；截距不加岭项"""
        if len(samples) < 2:
            raise BatchFitError(f"批量拟合至少需要 2 个样本，实际 {len(samples)} 个")
        for x, y in samples:
            check_features(x, y)

        names: List[str] = sorted({name for x, _ in samples for name in x})
        column = {name: j + 1 for j, name in enumerate(names)}
        X = np.zeros((len(samples), len(names) + 1))
        X[:, 0] = 1.0
        y = np.empty(len(samples))
        for i, (x, target) in enumerate(samples):
            for name, value in x.items():
                X[i, column[name]] = value
            y[i] = target

        penalty = np.full(X.shape[1], self.ridge)
        penalty[0] = 0.0
        gram = X.T @ X + np.diag(penalty)
        rhs = X.T @ y
        try:
            w = np.linalg.solve(gram, rhs)
            for _ in range(self.refinement_steps):
                w = np.linalg.solve(gram, rhs + penalty * w)
        except np.linalg.LinAlgError as e:
            raise BatchFitError(f"正规方程奇异: {e}")
        if not np.all(np.isfinite(w)):
            raise BatchFitError("正规方程的解非有限")

        self.intercept = float(w[0])
        self.weights = {name: float(w[column[name]]) for name in names}
        self.fitted = True
        self.n_samples = len(samples)
        self.logger.info(f"批量线性模型拟合完成: {len(samples)} 个样本, {len(names)} 个特征")
        return self

    def predict(self, x: FeatureVector) -> float:
        return self.intercept + sum(self.weights.get(name, 0.0) * value for name, value in x.items())

    def learn(self, x: FeatureVector, y: float) -> None:
        # 冻结的对照模型
        return None

    def diagnostics(self) -> Dict[str, Any]:
        return {'n_weights': len(self.weights), 'fit_samples': self.n_samples}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ridge': self.ridge,
            'refinement_steps': self.refinement_steps,
            'fitted': self.fitted,
            'n_samples': self.n_samples,
            'intercept': self.intercept,
            'weights': dict(self.weights),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BatchLinear':
        model = cls(data['ridge'], data['refinement_steps'])
        model.fitted = bool(data['fitted'])
        model.n_samples = int(data['n_samples'])
        model.intercept = float(data['intercept'])
        model.weights = {k: float(v) for k, v in data['weights'].items()}
        return model
