#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
先预测后学习的评估循环
q-error、滑动平均，以及一条修正流水线（特征构造器 + 学习器 + 修正器）的单步推进
"""

import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from correction import CorrectionStrategy, Corrector, parse_strategy, target_of
from errors import DataError, LearnerInputError, NumericError
from featurize import NUMERIC_FEATURES, FeatureBuilder
from learners import Regressor, create_learner, learner_from_dict, learner_to_dict
from plan_model import PlanRecord

REPORT_COLUMNS = ('step', 'bucket', 'y', 'y_hat_raw', 'y_hat_corrected', 'z', 'z_hat',
                  'q_raw', 'q_corrected', 'q_raw_roll', 'q_corrected_roll')

logger = logging.getLogger(__name__)


def q_error(y: float, y_hat: float) -> float:
    """两侧都按 1 行截断后的 max(y/ŷ, ŷ/y)"""
    if not y_hat > 0:
        raise DataError(f"q-error 要求估计值大于 0，实际为 {y_hat}")
    y = max(float(y), 1.0)
    y_hat = max(float(y_hat), 1.0)
    return max(y / y_hat, y_hat / y)


def rolling_mean(values: Sequence[float], window: int) -> np.ndarray:
    """每一步取最近 min(t+1, window) 个值的算术平均"""
    if window < 1:
        raise ValueError(f"滑动窗口必须 ≥ 1，实际为 {window}")
    series = pd.Series(np.asarray(values, dtype=float))
    return series.rolling(window, min_periods=1).mean().to_numpy()


@dataclass
class StepRow:
    """报告中的一行（滑动平均在整条流结束后统一计算）"""

    step: int
    bucket: int
    y: int
    y_hat_raw: float
    y_hat_corrected: float
    z: float
    z_hat: float
    q_raw: float
    q_corrected: float
    variance: Optional[float] = None


class CorrectionPipeline:
    """
    修正流水线
    策略为 model 时持有特征构造器和学习器；frozen 的流水线（批量对照）只预测不更新
    """

    def __init__(self, name: str, strategy: CorrectionStrategy, learner: Optional[Regressor] = None,
                 builder: Optional[FeatureBuilder] = None, corrector: Optional[Corrector] = None):
        if strategy.kind == 'model' and learner is None:
            raise DataError(f"流水线 {name} 的策略需要学习器")
        self.name = name
        self.strategy = strategy
        self.learner = learner
        self.builder = builder or FeatureBuilder()
        self.corrector = corrector or Corrector(strategy)
        self.frozen = False
        self.steps = 0
        self.skipped = 0
        self.nonfinite_predictions = 0
        self.elapsed = 0.0
        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_spec(cls, spec: Dict[str, Any], seed: int = 0, prior_weight: float = 5.0,
                  factor_min: float = 1e-4, factor_max: float = 1e4) -> 'CorrectionPipeline':
        """从运行配置里的 {name, strategy, params} 创建流水线"""
        strategy = parse_strategy(spec['strategy'])
        learner = None
        if strategy.kind == 'model':
            learner = create_learner(strategy.learner, spec.get('params'), seed=seed,
                                     feature_names=NUMERIC_FEATURES)
        builder = FeatureBuilder(prior_weight, one_hot=learner is not None and learner.input_view == 'full')
        corrector = Corrector(strategy, factor_min, factor_max)
        return cls(spec.get('name') or str(strategy), strategy, learner, builder, corrector)

    @property
    def needs_warmup(self) -> bool:
        return self.learner is not None and hasattr(self.learner, 'fit')

    def warm_up(self, records: Iterable[PlanRecord]) -> int:
        """批量对照：在预热流上逐条构造特征（先构造后更新编码器），最后一次性拟合并冻结"""
        samples = []
        for record in records:
            features = self.builder.build(record)
            z = target_of(record)
            samples.append((features.view(self.learner.input_view), z))
            self.builder.update(features, z)
        self.learner.fit(samples)
        self.freeze()
        self.logger.info(f"流水线 {self.name} 预热完成: {len(samples)} 条记录")
        return len(samples)

    def freeze(self) -> None:
        self.frozen = True
        self.builder.freeze()

    def step(self, record: PlanRecord, step: int, bucket: int = 0) -> Optional[StepRow]:
        started = time.perf_counter()
        try:
            return prequential_step(self, record, step, bucket)
        except (DataError, LearnerInputError, NumericError) as e:
            self.skipped += 1
            self.logger.warning(f"流水线 {self.name} 跳过记录 {record.plan_id}: {e}")
            return None
        finally:
            self.elapsed += time.perf_counter() - started
            self.steps += 1

    def diagnostics(self) -> Dict[str, Any]:
        data = {'skipped': self.skipped, 'nonfinite_predictions': self.nonfinite_predictions}
        if self.learner is not None:
            data.update(self.learner.diagnostics())
        if self.builder.vocabulary.ignored:
            data['ignored_one_hot'] = self.builder.vocabulary.ignored
        return data

    def factors(self) -> Dict[str, Any]:
        return {
            'global': self.corrector.global_factor.factor,
            'per_join': {str(j): f.factor for j, f in sorted(self.corrector.segmented.segments.items())},
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'strategy': str(self.strategy),
            'frozen': self.frozen,
            'steps': self.steps,
            'skipped': self.skipped,
            'nonfinite_predictions': self.nonfinite_predictions,
            'elapsed': self.elapsed,
            'builder': self.builder.to_dict(),
            'corrector': self.corrector.to_dict(),
            'learner': learner_to_dict(self.learner) if self.learner is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CorrectionPipeline':
        learner = learner_from_dict(data['learner']) if data['learner'] is not None else None
        pipeline = cls(data['name'], parse_strategy(data['strategy']), learner,
                       FeatureBuilder.from_dict(data['builder']), Corrector.from_dict(data['corrector']))
        pipeline.frozen = bool(data['frozen'])
        pipeline.steps = int(data['steps'])
        pipeline.skipped = int(data['skipped'])
        pipeline.nonfinite_predictions = int(data['nonfinite_predictions'])
        pipeline.elapsed = float(data.get('elapsed', 0.0))
        return pipeline


def prequential_step(pipeline: CorrectionPipeline, record: PlanRecord, step: int, bucket: int = 0) -> StepRow:
    """
    单步的顺序固定：
    1) 用当前编码器构造特征 2) 预测 ẑ 3) 修正估计值并计算两个 q-error 4) 更新修正系数、编码器和学习器
    真实基数不会影响本步的特征和预测
    """
    z = target_of(record)
    features = None
    z_hat = 0.0
    variance = None
    learner = pipeline.learner

    if learner is not None:
        features = pipeline.builder.build(record)
        x = features.view(learner.input_view)
        if hasattr(learner, 'predictive'):
            z_hat, variance = learner.predictive(x)
        else:
            z_hat = learner.predict(x)
        if not math.isfinite(z_hat):
            pipeline.nonfinite_predictions += 1
            pipeline.logger.warning(f"流水线 {pipeline.name} 在记录 {record.plan_id} 上的预测非有限，按 0 处理")
            z_hat = 0.0

    corrected, factor = pipeline.corrector.correct(record, z_hat)
    if learner is None:
        z_hat = math.log(factor)
    row = StepRow(
        step=step,
        bucket=bucket,
        y=record.actual_cardinality,
        y_hat_raw=record.estimated_cardinality,
        y_hat_corrected=corrected,
        z=z,
        z_hat=z_hat,
        q_raw=q_error(record.actual_cardinality, record.estimated_cardinality),
        q_corrected=q_error(record.actual_cardinality, corrected),
        variance=variance,
    )

    if not pipeline.frozen:
        if learner is not None:
            learner.learn(x, z)
            pipeline.builder.update(features, z)
        pipeline.corrector.update(record)
    return row


def build_report(rows: Sequence[StepRow], window: int) -> pd.DataFrame:
    """报告表，列顺序固定"""
    frame = pd.DataFrame([asdict(r) for r in rows],
                         columns=[f for f in StepRow.__dataclass_fields__])
    frame['q_raw_roll'] = rolling_mean(frame['q_raw'].to_numpy(), window)
    frame['q_corrected_roll'] = rolling_mean(frame['q_corrected'].to_numpy(), window)
    return frame[list(REPORT_COLUMNS)]


def segment_stats(values: Sequence[float]) -> Dict[str, Optional[float]]:
    """mean / median / p95 / p99 / max"""
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        return {'count': 0, 'mean': None, 'median': None, 'p95': None, 'p99': None, 'max': None}
    return {
        'count': int(array.size),
        'mean': float(array.mean()),
        'median': float(np.median(array)),
        'p95': float(np.percentile(array, 95)),
        'p99': float(np.percentile(array, 99)),
        'max': float(array.max()),
    }


def summarize(frame: pd.DataFrame, boundaries: Sequence[int] = ()) -> Dict[str, Any]:
    """整条流及按漂移点切开的各段统计"""
    summary = {'overall': {'q_raw': segment_stats(frame['q_raw']), 'q_corrected': segment_stats(frame['q_corrected'])}}
    edges = [0] + [int(b) for b in boundaries] + [None]
    segments = []
    for start, end in zip(edges[:-1], edges[1:]):
        mask = frame['step'] >= start
        if end is not None:
            mask &= frame['step'] < end
        part = frame[mask]
        segments.append({
            'start': start, 'end': end,
            'q_raw': segment_stats(part['q_raw']),
            'q_corrected': segment_stats(part['q_corrected']),
        })
    summary['segments'] = segments
    return summary
