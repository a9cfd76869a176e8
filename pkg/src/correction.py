#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
基数修正
全局修正系数 c、按连接数分段的系数 c_j，以及由学习器预测的逐计划修正；
学习目标为对数修正量 z = ln(max(y, 1) / ŷ)
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from errors import ConfigError, DataError
from plan_model import PlanRecord

STRATEGY_KINDS = ('none', 'global', 'per-join', 'model')

logger = logging.getLogger(__name__)


def clamped_ratio(record: PlanRecord) -> float:
    if not record.estimated_cardinality > 0:
        raise DataError(f"记录 {record.plan_id} 的估计基数必须大于 0")
    return max(record.actual_cardinality, 1) / record.estimated_cardinality


def target_of(record: PlanRecord) -> float:
    """z = ln(max(y, 1) / ŷ)"""
    return math.log(clamped_ratio(record))


class GlobalFactor:
    """原始比值 y/ŷ 的流式均值；还没有观测时 c = 1"""

    def __init__(self, count: int = 0, mean: float = 1.0):
        self.count = count
        self.mean = mean

    @property
    def factor(self) -> float:
        return self.mean if self.count > 0 else 1.0

    def update(self, ratio: float) -> None:
        self.count += 1
        if self.count == 1:
            self.mean = ratio
        else:
            self.mean += (ratio - self.mean) / self.count

    def to_dict(self) -> Dict[str, Any]:
        return {'count': self.count, 'mean': self.mean}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GlobalFactor':
        return cls(int(data['count']), float(data['mean']))


def update_global(factor: GlobalFactor, record: PlanRecord) -> GlobalFactor:
    factor.update(clamped_ratio(record))
    return factor


class SegmentedFactors:
    """按连接数 j 分段的 c_j，没见过的 j 回退到全局系数"""

    def __init__(self):
        self.segments: Dict[int, GlobalFactor] = {}
        self.fallback = GlobalFactor()

    def factor_for(self, n_joins: int) -> float:
        segment = self.segments.get(n_joins)
        if segment is None or segment.count == 0:
            return self.fallback.factor
        return segment.factor

    def update(self, record: PlanRecord) -> None:
        ratio = clamped_ratio(record)
        self.segments.setdefault(record.n_joins, GlobalFactor()).update(ratio)
        self.fallback.update(ratio)

    def to_dict(self) -> Dict[str, Any]:
        return {'fallback': self.fallback.to_dict(),
                'segments': {str(j): f.to_dict() for j, f in sorted(self.segments.items())}}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SegmentedFactors':
        factors = cls()
        factors.fallback = GlobalFactor.from_dict(data['fallback'])
        factors.segments = {int(j): GlobalFactor.from_dict(f) for j, f in data['segments'].items()}
        return factors


@dataclass(frozen=True)
class CorrectionStrategy:
    kind: str
    learner: Optional[str] = None

    def __str__(self):
        return f"model:{self.learner}" if self.kind == 'model' else self.kind


def parse_strategy(text: str) -> CorrectionStrategy:
    """none | global | per-join | model:<学习器名>"""
    text = text.strip()
    if text in ('none', 'global', 'per-join'):
        return CorrectionStrategy(text)
    if text == 'per_join_count':
        return CorrectionStrategy('per-join')
    if text.startswith('model:') and text[len('model:'):]:
        return CorrectionStrategy('model', text[len('model:'):])
    raise ConfigError(f"无法识别的修正策略 {text!r}，可选 none / global / per-join / model:<学习器>")


class Corrector:
    """按策略修正估计值；修正结果不少于 1 行，模型预测的系数限制在 [factor_min, factor_max]"""

    def __init__(self, strategy: CorrectionStrategy, factor_min: float = 1e-4, factor_max: float = 1e4):
        if not 0 < factor_min <= 1.0 <= factor_max:
            raise ConfigError(f"修正系数范围非法: [{factor_min}, {factor_max}]")
        self.strategy = strategy
        self.factor_min = factor_min
        self.factor_max = factor_max
        self.global_factor = GlobalFactor()
        self.segmented = SegmentedFactors()

    def factor(self, record: PlanRecord, z_hat: float = 0.0) -> float:
        kind = self.strategy.kind
        if kind == 'none':
            return 1.0
        if kind == 'global':
            return self.global_factor.factor
        if kind == 'per-join':
            return self.segmented.factor_for(record.n_joins)
        return min(max(math.exp(min(z_hat, 700.0)), self.factor_min), self.factor_max)

    def correct(self, record: PlanRecord, z_hat: float = 0.0) -> Tuple[float, float]:
        """返回 (修正后的基数, 实际使用的系数)"""
        factor = self.factor(record, z_hat)
        return max(record.estimated_cardinality * factor, 1.0), factor

    def update(self, record: PlanRecord) -> None:
        ratio = clamped_ratio(record)
        self.global_factor.update(ratio)
        self.segmented.update(record)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'strategy': str(self.strategy), 'factor_min': self.factor_min, 'factor_max': self.factor_max,
            'global': self.global_factor.to_dict(), 'segmented': self.segmented.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Corrector':
        corrector = cls(parse_strategy(data['strategy']), data['factor_min'], data['factor_max'])
        corrector.global_factor = GlobalFactor.from_dict(data['global'])
        corrector.segmented = SegmentedFactors.from_dict(data['segmented'])
        return corrector


def correct(record: PlanRecord, corrector: Corrector, z_hat: float = 0.0) -> float:
    """按修正器的策略修正一条记录的估计值"""
    return corrector.correct(record, z_hat)[0]
