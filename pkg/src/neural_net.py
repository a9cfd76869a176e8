#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
前馈神经网络
[p, 30, 30, 1] 的多层感知机，隐藏层 ReLU、输出层恒等，逐条样本反向传播并用 Adam 更新
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from learners import FeatureVector, FixedIndexMixin, Regressor, check_features


class Adam:
    """Adam 优化器，一阶/二阶矩估计带偏差修正"""

    def __init__(self, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for key, param in params.items():
            g = grads[key]
            if key not in self.m:
                self.m[key] = np.zeros_like(param)
                self.v[key] = np.zeros_like(param)
            self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * g
            self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[key] / bc1
            v_hat = self.v[key] / bc2
            param -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lr': self.lr, 'beta1': self.beta1, 'beta2': self.beta2, 'epsilon': self.epsilon, 't': self.t,
            'm': {k: v.tolist() for k, v in self.m.items()},
            'v': {k: v.tolist() for k, v in self.v.items()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Adam':
        adam = cls(data['lr'], data['beta1'], data['beta2'], data['epsilon'])
        adam.t = int(data['t'])
        adam.m = {k: np.asarray(v, dtype=float) for k, v in data['m'].items()}
        adam.v = {k: np.asarray(v, dtype=float) for k, v in data['v'].items()}
        return adam


class MLPRegressor(FixedIndexMixin, Regressor):
    """
    多层感知机回归器
    输入维度固定：特征名 → 下标在构造时冻结，未知特征名被忽略，缺失特征按 0 处理
    """

    input_view = 'dense'
    needs_feature_names = True
    needs_seed = True

    def __init__(self, feature_names: Sequence[str], hidden: Sequence[int] = (30, 30), learning_rate: float = 0.01,
                 seed: int = 0, init: str = 'he'):
        self._init_index(feature_names)
        self.hidden = tuple(int(h) for h in hidden)
        self.learning_rate = float(learning_rate)
        self.seed = seed
        self.sizes = (len(self.feature_names),) + self.hidden + (1,)
        self.params: Dict[str, np.ndarray] = {}
        rng = np.random.default_rng(seed)
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if init == 'zeros':
                self.params[f'W{i}'] = np.zeros((fan_in, fan_out))
            else:
                self.params[f'W{i}'] = rng.normal(0.0, np.sqrt(2.0 / max(fan_in, 1)), (fan_in, fan_out))
            self.params[f'b{i}'] = np.zeros(fan_out)
        self.optimizer = Adam(lr=self.learning_rate)
        self.logger = logging.getLogger(__name__)

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def _forward(self, a: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        activations = [a]
        pre_activations = []
        for i in range(self.n_layers):
            z = activations[-1] @ self.params[f'W{i}'] + self.params[f'b{i}']
            pre_activations.append(z)
            activations.append(z if i == self.n_layers - 1 else np.maximum(z, 0.0))
        return activations, pre_activations

    def predict(self, x: FeatureVector) -> float:
        activations, _ = self._forward(self._vector(x))
        return float(activations[-1][0])

    def gradients(self, x: FeatureVector, y: float) -> Dict[str, np.ndarray]:
        """½(ŷ − y)² 对所有参数的梯度"""
        activations, pre_activations = self._forward(self._vector(x))
        delta = activations[-1] - y
        grads = {}
        for i in reversed(range(self.n_layers)):
            grads[f'W{i}'] = np.outer(activations[i], delta)
            grads[f'b{i}'] = delta.copy()
            if i > 0:
                delta = (self.params[f'W{i}'] @ delta) * (pre_activations[i - 1] > 0.0)
        return grads

    def learn(self, x: FeatureVector, y: float) -> None:
        check_features(x, y)
        self._vector(x, count_ignored=True)
        self.optimizer.step(self.params, self.gradients(x, y))

    def diagnostics(self) -> Dict[str, Any]:
        return {'ignored_features': self.ignored_features, 'adam_steps': self.optimizer.t}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'feature_names': self.feature_names,
            'hidden': list(self.hidden),
            'learning_rate': self.learning_rate,
            'seed': self.seed,
            'ignored_features': self.ignored_features,
            'params': {k: v.tolist() for k, v in self.params.items()},
            'optimizer': self.optimizer.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MLPRegressor':
        model = cls(data['feature_names'], data['hidden'], data['learning_rate'], data['seed'])
        model.ignored_features = int(data['ignored_features'])
        model.params = {k: np.asarray(v, dtype=float) for k, v in data['params'].items()}
        model.optimizer = Adam.from_dict(data['optimizer'])
        return model
