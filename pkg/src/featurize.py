#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
特征提取
计划记录 → 特征向量：通用计划统计量、流式目标编码、动态 one-hot 词表和流式标准化
"""

import copy
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from errors import LearnerInputError
from plan_model import PlanRecord

FeatureVector = Dict[str, float]

GENERAL_FEATURES = ('n_joins', 'n_relations', 'n_predicates', 'max_predicates_one_relation')
KEY_KINDS = ('rel', 'join', 'attr', 'attrval', 'attrpair', 'opaque')
TARGET_FEATURES = tuple(f"te:{kind}" for kind in KEY_KINDS)
# 定长学习器（MLP、贝叶斯线性回归）使用的固定特征名
NUMERIC_FEATURES = GENERAL_FEATURES + TARGET_FEATURES
ONE_HOT_PREFIX = 'oh:'

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneralFeatures:
    n_joins: int
    n_relations: int
    n_predicates: int
    max_predicates_one_relation: int

    def as_features(self) -> FeatureVector:
        return {name: float(getattr(self, name)) for name in GENERAL_FEATURES}


def extract_general(record: PlanRecord) -> GeneralFeatures:
    """连接数、关系数、WHERE 条件数、单个关系上最多的条件数（不透明条件也算 WHERE 条件）"""
    per_relation = Counter(p.relation for p in record.predicates)
    per_relation.update(o.relation for o in record.opaque_predicates)
    n_predicates = len(record.predicates) + len(record.opaque_predicates)
    return GeneralFeatures(
        n_joins=len(record.joins),
        n_relations=len(record.relations),
        n_predicates=n_predicates,
        max_predicates_one_relation=max(per_relation.values(), default=0),
    )


def _format_literal(literal) -> str:
    if isinstance(literal, str):
        return "'" + literal.replace("'", "''") + "'"
    return repr(literal)


def extract_keys(record: PlanRecord) -> Tuple[str, ...]:
    """目标编码 / one-hot 的键，按类别分组、组内排序，不含重复"""
    keys: List[str] = []
    keys.extend(f"rel:{r}" for r in sorted(record.relations))
    keys.extend(sorted(f"join:{j.signature}" for j in record.joins))
    columns = sorted({p.column for p in record.predicates})
    keys.extend(f"attr:{c}" for c in columns)
    keys.extend(sorted({f"attrval:{p.column}{p.operator}{_format_literal(p.literal)}" for p in record.predicates}))
    keys.extend(f"attrpair:{{{a},{b}}}" for a, b in itertools.combinations(columns, 2))
    keys.extend(sorted({f"opaque:{o.relation}:{o.expression}" for o in record.opaque_predicates}))
    return tuple(dict.fromkeys(keys))


def key_kind(key: str) -> str:
    return key.split(':', 1)[0]


class TargetEncoder:
    """
    流式目标编码器
    每个键维护 (n_k, x̄_k)，全局维护 (N, ḡ)；编码值为贝叶斯平均 (m·ḡ + n_k·x̄_k) / (m + n_k)
    """

    VERSION = 1

    def __init__(self, prior_weight: float = 5.0):
        if not prior_weight >= 0:
            raise ValueError(f"先验权重必须 ≥ 0，实际为 {prior_weight}")
        self.prior_weight = float(prior_weight)
        self.counts: Dict[str, int] = {}
        self.means: Dict[str, float] = {}
        self.global_count = 0
        self.global_mean = 0.0

    @property
    def prior(self) -> float:
        return self.global_mean if self.global_count > 0 else 0.0

    def value(self, key: str) -> float:
        n = self.counts.get(key, 0)
        if n == 0:
            return self.prior
        m = self.prior_weight
        return (m * self.prior + n * self.means[key]) / (m + n)

    def encode(self, keys: Iterable[str]) -> FeatureVector:
        return {key: self.value(key) for key in keys}

    def encode_aggregates(self, keys: Iterable[str]) -> FeatureVector:
        """按键类别取平均，得到定长的 te:<kind> 特征；记录中没有的类别不输出"""
        grouped: Dict[str, List[float]] = {}
        for key in keys:
            grouped.setdefault(key_kind(key), []).append(self.value(key))
        return {f"te:{kind}": math.fsum(values) / len(values) for kind, values in grouped.items()}

    def update(self, keys: Iterable[str], target: float) -> None:
        """x̄ ← x̄ + (x − x̄) / (n + 1)，对每个键和全局各做一次"""
        if not math.isfinite(target):
            raise LearnerInputError(f"目标编码收到非有限目标值 {target}")
        for key in keys:
            n = self.counts.get(key, 0) + 1
            mean = self.means.get(key, 0.0)
            self.counts[key] = n
            self.means[key] = mean + (target - mean) / n
        self.global_count += 1
        self.global_mean += (target - self.global_mean) / self.global_count

    def snapshot(self) -> 'TargetEncoder':
        """只读副本，供并发打分"""
        return copy.deepcopy(self)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'version': self.VERSION,
            'prior_weight': self.prior_weight,
            'global_count': self.global_count,
            'global_mean': self.global_mean,
            'keys': {key: [self.counts[key], self.means[key]] for key in self.counts},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TargetEncoder':
        encoder = cls(data['prior_weight'])
        encoder.global_count = int(data['global_count'])
        encoder.global_mean = float(data['global_mean'])
        for key, (n, mean) in data['keys'].items():
            encoder.counts[key] = int(n)
            encoder.means[key] = float(mean)
        return encoder


class OneHotVocabulary:
    """动态词表：新键第一次出现时加入，特征名在进程生命周期内不变"""

    def __init__(self, frozen: bool = False):
        self.index: Dict[str, int] = {}
        self.frozen = frozen
        self.ignored = 0

    def __len__(self):
        return len(self.index)

    @staticmethod
    def feature_name(key: str) -> str:
        return ONE_HOT_PREFIX + key

    def one_hot(self, keys: Iterable[str]) -> FeatureVector:
        vector = {}
        for key in keys:
            if key not in self.index:
                if self.frozen:
                    self.ignored += 1
                    continue
                self.index[key] = len(self.index)
            vector[self.feature_name(key)] = 1.0
        return vector

    def to_dict(self) -> Dict[str, Any]:
        return {'frozen': self.frozen, 'ignored': self.ignored, 'keys': sorted(self.index, key=self.index.get)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'OneHotVocabulary':
        vocab = cls(bool(data['frozen']))
        vocab.ignored = int(data.get('ignored', 0))
        vocab.index = {key: i for i, key in enumerate(data['keys'])}
        return vocab


class RunningScaler:
    """逐特征的流式均值/方差 (Welford)，用于标准化数值特征"""

    def __init__(self):
        self.count: Dict[str, int] = {}
        self.mean: Dict[str, float] = {}
        self.m2: Dict[str, float] = {}

    def std(self, name: str) -> float:
        n = self.count.get(name, 0)
        if n < 2:
            return 1.0
        variance = self.m2[name] / n
        return math.sqrt(variance) if variance > 1e-12 else 1.0

    def transform(self, features: FeatureVector) -> FeatureVector:
        return {name: (value - self.mean.get(name, 0.0)) / self.std(name) for name, value in features.items()}

    def update(self, features: FeatureVector) -> None:
        for name, value in features.items():
            n = self.count.get(name, 0) + 1
            mean = self.mean.get(name, 0.0)
            delta = value - mean
            mean += delta / n
            self.count[name] = n
            self.mean[name] = mean
            self.m2[name] = self.m2.get(name, 0.0) + delta * (value - mean)

    def to_dict(self) -> Dict[str, Any]:
        return {name: [self.count[name], self.mean[name], self.m2[name]] for name in self.count}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunningScaler':
        scaler = cls()
        for name, (n, mean, m2) in data.items():
            scaler.count[name] = int(n)
            scaler.mean[name] = float(mean)
            scaler.m2[name] = float(m2)
        return scaler


@dataclass
class FeatureSet:
    """一条记录的全部特征视图"""

    keys: Tuple[str, ...]
    raw: FeatureVector
    scaled: FeatureVector
    one_hot: FeatureVector = field(default_factory=dict)

    def view(self, name: str) -> FeatureVector:
        """full: 标准化数值 + one-hot；dense: 标准化数值；raw: 原始数值"""
        if name == 'full':
            vector = dict(self.scaled)
            vector.update(self.one_hot)
            return vector
        if name == 'dense':
            return dict(self.scaled)
        if name == 'raw':
            return dict(self.raw)
        raise ValueError(f"未知特征视图 {name!r}")


class FeatureBuilder:
    """每条流水线一个：持有目标编码器、one-hot 词表和标准化器"""

    def __init__(self, prior_weight: float = 5.0, one_hot: bool = True):
        self.encoder = TargetEncoder(prior_weight)
        self.vocabulary = OneHotVocabulary()
        self.scaler = RunningScaler()
        self.use_one_hot = one_hot
        self.frozen = False
        self.logger = logging.getLogger(__name__)

    def build(self, record: PlanRecord) -> FeatureSet:
        """只读取当前状态（词表除外，新键会加入词表）"""
        keys = extract_keys(record)
        raw = extract_general(record).as_features()
        raw.update(self.encoder.encode_aggregates(keys))
        for name, value in raw.items():
            if not math.isfinite(value):
                raise LearnerInputError(f"记录 {record.plan_id} 的特征 {name} 非有限")
        one_hot = self.vocabulary.one_hot(keys) if self.use_one_hot else {}
        return FeatureSet(keys, raw, self.scaler.transform(raw), one_hot)

    def update(self, features: FeatureSet, target: float) -> None:
        if self.frozen:
            return
        self.encoder.update(features.keys, target)
        self.scaler.update(features.raw)

    def freeze(self) -> None:
        """冻结之后编码器、标准化器和词表都不再变化"""
        self.frozen = True
        self.vocabulary.frozen = True
        self.logger.info(f"特征构造器已冻结: {len(self.encoder.counts)} 个编码键, {len(self.vocabulary)} 个 one-hot 特征")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'encoder': self.encoder.to_dict(),
            'vocabulary': self.vocabulary.to_dict(),
            'scaler': self.scaler.to_dict(),
            'one_hot': self.use_one_hot,
            'frozen': self.frozen,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FeatureBuilder':
        builder = cls(one_hot=bool(data['one_hot']))
        builder.encoder = TargetEncoder.from_dict(data['encoder'])
        builder.vocabulary = OneHotVocabulary.from_dict(data['vocabulary'])
        builder.scaler = RunningScaler.from_dict(data['scaler'])
        builder.frozen = bool(data['frozen'])
        return builder
