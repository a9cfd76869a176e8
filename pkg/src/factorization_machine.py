#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
因子分解机
ŷ = w0 + Σ w_j x_j + Σ_{j<l} ⟨v_j, v_l⟩ x_j x_l，二阶项用 ½ Σ_f [(Σ_j v_jf x_j)² − Σ_j v_jf² x_j²] 计算；
隐向量在特征第一次参与训练时用带种子的高斯分布初始化
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from learners import FeatureVector, Regressor, check_features, clip


class FactorizationMachine(Regressor):
    """在线因子分解机，SGD + 常数学习率"""

    input_view = 'full'
    needs_seed = True

    def __init__(self, n_factors: int = 10, learning_rate: float = 0.1, init_std: float = 0.01,
                 clip_gradient: Optional[float] = 10.0, seed: int = 0):
        if n_factors < 1:
            raise ValueError(f"隐向量维度必须 ≥ 1，实际为 {n_factors}")
        self.n_factors = int(n_factors)
        self.learning_rate = float(learning_rate)
        self.init_std = float(init_std)
        self.clip_gradient = clip_gradient
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.w0 = 0.0
        self.weights: Dict[str, float] = {}
        self.latent: Dict[str, np.ndarray] = {}
        self.logger = logging.getLogger(__name__)

    def _active(self, x: FeatureVector) -> Tuple[List[str], np.ndarray, np.ndarray]:
        """非零特征的名字、取值，以及隐向量矩阵（没见过的特征按零向量处理）"""
        names = [name for name, value in x.items() if value != 0.0]
        values = np.array([x[name] for name in names], dtype=float)
        V = np.zeros((len(names), self.n_factors))
        for i, name in enumerate(names):
            vector = self.latent.get(name)
            if vector is not None:
                V[i] = vector
        return names, values, V

    def _predict_active(self, names: List[str], values: np.ndarray, V: np.ndarray) -> Tuple[float, np.ndarray]:
        linear = self.w0 + sum(self.weights.get(name, 0.0) * value for name, value in zip(names, values))
        if not names:
            return linear, np.zeros(self.n_factors)
        s = values @ V
        pairwise = 0.5 * float(np.sum(s * s - (values * values) @ (V * V)))
        return linear + pairwise, s

    def predict(self, x: FeatureVector) -> float:
        prediction, _ = self._predict_active(*self._active(x))
        return prediction

    def gradient(self, x: FeatureVector) -> Tuple[float, Dict[str, float], Dict[str, np.ndarray]]:
        """∂ŷ/∂w0 = 1，∂ŷ/∂w_j = x_j，∂ŷ/∂v_jf = x_j (Σ_l v_lf x_l − v_jf x_j)"""
        names, values, V = self._active(x)
        _, s = self._predict_active(names, values, V)
        grad_w = {name: float(value) for name, value in zip(names, values)}
        grad_v = {name: value * (s - V[i] * value) for i, (name, value) in enumerate(zip(names, values))}
        return 1.0, grad_w, grad_v

    def learn(self, x: FeatureVector, y: float) -> None:
        check_features(x, y)
        for name, value in x.items():
            if value != 0.0 and name not in self.latent:
                self.latent[name] = self.rng.normal(0.0, self.init_std, self.n_factors)

        names, values, V = self._active(x)
        prediction, s = self._predict_active(names, values, V)
        error = clip(prediction - y, self.clip_gradient)
        if error == 0.0:
            return
        step = self.learning_rate * error
        self.w0 -= step
        for i, (name, value) in enumerate(zip(names, values)):
            self.weights[name] = self.weights.get(name, 0.0) - step * value
            self.latent[name] = V[i] - step * value * (s - V[i] * value)

    def diagnostics(self) -> Dict[str, Any]:
        return {'n_features': len(self.latent)}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_factors': self.n_factors,
            'learning_rate': self.learning_rate,
            'init_std': self.init_std,
            'clip_gradient': self.clip_gradient,
            'seed': self.seed,
            'rng': self.rng.bit_generator.state,
            'w0': self.w0,
            'weights': dict(self.weights),
            'latent': {name: vector.tolist() for name, vector in self.latent.items()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FactorizationMachine':
        model = cls(data['n_factors'], data['learning_rate'], data['init_std'], data['clip_gradient'], data['seed'])
        model.rng.bit_generator.state = data['rng']
        model.w0 = float(data['w0'])
        model.weights = {k: float(v) for k, v in data['weights'].items()}
        model.latent = {k: np.asarray(v, dtype=float) for k, v in data['latent'].items()}
        return model
