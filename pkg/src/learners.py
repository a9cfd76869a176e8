#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
学习器接口
所有回归器共用的 predict / learn 约定，以及按名字创建学习器的注册表
"""

import importlib
import logging
import math
from typing import Any, Dict, Optional, Sequence

import numpy as np

from errors import ConfigError, LearnerInputError

FeatureVector = Dict[str, float]

logger = logging.getLogger(__name__)


def check_features(x: FeatureVector, y: Optional[float] = None) -> None:
    """非有限输入直接拒绝，调用方的状态保持不变"""
    for name, value in x.items():
        if not math.isfinite(value):
            raise LearnerInputError(f"特征 {name} 的值非有限: {value}")
    if y is not None and not math.isfinite(y):
        raise LearnerInputError(f"目标值非有限: {y}")


def clip(value: float, limit: Optional[float]) -> float:
    if limit is None:
        return value
    return max(-limit, min(limit, value))


class Regressor:
    """
    回归器基类
    predict 不修改状态；learn 每次只处理一条观测；遇到没见过的特征名不能报错
    """

    name = 'regressor'
    # 使用的特征视图，见 featurize.FeatureSet.view
    input_view = 'full'

    def predict(self, x: FeatureVector) -> float:
        raise NotImplementedError

    def learn(self, x: FeatureVector, y: float) -> None:
        raise NotImplementedError

    @property
    def trainable(self) -> bool:
        """批量对照模型拟合后为 False"""
        return True

    def diagnostics(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Regressor':
        raise NotImplementedError


class FixedIndexMixin:
    """定长学习器：特征名 → 下标在构造时确定，之后出现的其他特征名被忽略并计数"""

    def _init_index(self, feature_names: Sequence[str]):
        self.feature_names = list(feature_names)
        self.index = {name: i for i, name in enumerate(self.feature_names)}
        self.ignored_features = 0

    def _vector(self, x: FeatureVector, count_ignored: bool = False) -> np.ndarray:
        vector = np.zeros(len(self.feature_names))
        for name, value in x.items():
            i = self.index.get(name)
            if i is None:
                if count_ignored:
                    self.ignored_features += 1
                continue
            vector[i] = value
        return vector


# 名字 → (模块, 类, 默认参数)
LEARNERS = {
    'linear': ('linear_models', 'LinearSGD', {}),
    'poly_linear': ('linear_models', 'PolynomialLinear', {}),
    'batch_linear': ('linear_models', 'BatchLinear', {}),
    'fm': ('factorization_machine', 'FactorizationMachine', {}),
    'mlp': ('neural_net', 'MLPRegressor', {}),
    'htree': ('hoeffding_tree', 'HoeffdingTreeRegressor', {}),
    'bayes': ('bayes_linear', 'BayesLinearRegressor', {}),
    'bayes_drift': ('bayes_linear', 'BayesLinearRegressor', {'gamma': 0.7}),
}


def learner_class(name: str):
    if name not in LEARNERS:
        raise ConfigError(f"未知学习器 {name!r}，可选: {', '.join(sorted(LEARNERS))}")
    module_name, class_name, _ = LEARNERS[name]
    return getattr(importlib.import_module(module_name), class_name)


def create_learner(name: str, params: Optional[Dict[str, Any]] = None, seed: int = 0,
                   feature_names: Optional[Sequence[str]] = None) -> Regressor:
    """按注册名创建学习器；定长学习器需要 feature_names，带随机初始化的学习器使用 seed"""
    cls = learner_class(name)
    kwargs = dict(LEARNERS[name][2])
    kwargs.update(params or {})
    if getattr(cls, 'needs_feature_names', False):
        if feature_names is None:
            raise ConfigError(f"学习器 {name} 需要固定的特征名列表")
        kwargs['feature_names'] = list(feature_names)
    if getattr(cls, 'needs_seed', False):
        kwargs.setdefault('seed', seed)
    try:
        learner = cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"学习器 {name} 的参数错误: {e}")
    learner.name = name
    logger.debug(f"创建学习器 {name}: {kwargs}")
    return learner


def learner_from_dict(data: Dict[str, Any]) -> Regressor:
    """从状态快照恢复学习器"""
    learner = learner_class(data['learner']).from_dict(data['state'])
    learner.name = data['learner']
    return learner


def learner_to_dict(learner: Regressor) -> Dict[str, Any]:
    return {'learner': learner.name, 'state': learner.to_dict()}
