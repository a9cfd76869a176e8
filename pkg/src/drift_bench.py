#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
概念漂移调度
把查询模板聚成若干桶，并决定数据流每一步从哪个桶采样：硬切换或 softmax 软漂移
"""

import bisect
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HardSchedule:
    """在给定步数处切换到下一个桶；恰好位于切换点的步属于新桶"""

    switch_points: Tuple[int, ...] = ()

    def __post_init__(self):
        points = tuple(int(p) for p in self.switch_points)
        if any(b <= a for a, b in zip(points, points[1:])):
            raise ConfigError(f"硬切换点必须严格递增: {points}")
        if points and points[0] < 0:
            raise ConfigError(f"硬切换点不能为负: {points}")
        object.__setattr__(self, 'switch_points', points)


@dataclass(frozen=True)
class SoftSchedule:
    """每个桶一个中心 t_b，宽度 d 决定漂移的陡峭程度"""

    centers: Tuple[float, ...]
    width: float = 0.02
    normalize_time: bool = True

    def __post_init__(self):
        centers = tuple(float(c) for c in self.centers)
        if not centers:
            raise ConfigError("软漂移至少需要一个桶中心")
        if len(set(centers)) != len(centers):
            raise ConfigError(f"软漂移的桶中心必须互不相同: {centers}")
        if not self.width > 0:
            raise ConfigError(f"软漂移宽度 d 必须大于 0，实际为 {self.width}")
        object.__setattr__(self, 'centers', centers)


DriftSchedule = Union[HardSchedule, SoftSchedule]


@dataclass
class BucketAssignment:
    """模板 → 桶编号"""

    mapping: Dict[str, int]
    n_buckets: int

    def __post_init__(self):
        used = set(self.mapping.values())
        if used != set(range(self.n_buckets)):
            raise ConfigError(f"桶分配必须覆盖 0..{self.n_buckets - 1} 且没有空桶，实际为 {sorted(used)}")

    def bucket_of(self, template_id: str) -> int:
        return self.mapping[template_id]

    def templates_in(self, bucket: int) -> List[str]:
        return [t for t, b in self.mapping.items() if b == bucket]


def _jaccard(a: frozenset, b: frozenset) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 1.0


def cluster_buckets(templates: Sequence[Any], n_buckets: int = 3) -> BucketAssignment:
    """按关系集合的 Jaccard 相似度贪心凝聚成 n_buckets 个桶，结果只依赖输入顺序"""
    if n_buckets < 1:
        raise ConfigError("桶数至少为 1")
    if len(templates) < n_buckets:
        raise ConfigError(f"模板数 {len(templates)} 少于桶数 {n_buckets}")

    clusters: List[List[int]] = [[i] for i in range(len(templates))]
    relation_sets: List[frozenset] = [frozenset(t.relations) for t in templates]

    while len(clusters) > n_buckets:
        best: Optional[Tuple[float, int, int]] = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                similarity = _jaccard(relation_sets[i], relation_sets[j])
                if best is None or similarity > best[0]:
                    best = (similarity, i, j)
        _, i, j = best
        clusters[i] = clusters[i] + clusters[j]
        relation_sets[i] = relation_sets[i] | relation_sets[j]
        del clusters[j]
        del relation_sets[j]

    # 桶编号按各簇中第一个模板的位置排序
    clusters.sort(key=min)
    mapping = {}
    for bucket, members in enumerate(clusters):
        for index in sorted(members):
            mapping[templates[index].template_id] = bucket
    logger.debug(f"模板聚类结果: {mapping}")
    return BucketAssignment(mapping, n_buckets)


def hard_bucket(t: int, schedule: HardSchedule) -> int:
    """桶编号 = 不大于 t 的切换点个数"""
    return bisect.bisect_right(schedule.switch_points, t)


def soft_bucket_probs(t: int, n: int, schedule: SoftSchedule) -> np.ndarray:
    """P(b, t) ∝ exp(−(t − t_b)² / d)，在对数空间里归一化"""
    tau = t / n if schedule.normalize_time else float(t)
    centers = np.asarray(schedule.centers, dtype=float)
    logits = -((tau - centers) ** 2) / schedule.width
    logits -= logits.max()
    weights = np.exp(logits)
    return weights / weights.sum()


def sample_bucket(probs: np.ndarray, rng: np.random.Generator) -> int:
    """按类别分布抽一个桶"""
    cumulative = np.cumsum(probs)
    u = rng.random() * cumulative[-1]
    index = int(np.searchsorted(cumulative, u, side='right'))
    return min(index, len(probs) - 1)


def default_centers(n_buckets: int) -> Tuple[float, ...]:
    """在归一化时间上均匀分布: t_b = (b + 0.5) / B"""
    return tuple((b + 0.5) / n_buckets for b in range(n_buckets))


def build_schedule(drift: Dict[str, Any], n_steps: int, n_buckets: int) -> DriftSchedule:
    """从运行配置中的 drift 段构造调度"""
    mode = drift.get('mode', 'hard')
    if mode == 'hard':
        if drift.get('switch_points') is not None:
            points = [int(p) for p in drift['switch_points']]
        else:
            points = [int(round(f * n_steps)) for f in drift.get('switch_fracs', [])]
        schedule = HardSchedule(tuple(points))
        if points and points[-1] >= n_steps:
            raise ConfigError(f"硬切换点必须小于总步数 {n_steps}: {points}")
        if len(points) > n_buckets - 1:
            raise ConfigError(f"{n_buckets} 个桶最多 {n_buckets - 1} 个切换点")
        return schedule
    if mode == 'soft':
        centers = drift.get('centers') or default_centers(n_buckets)
        if len(centers) != n_buckets:
            raise ConfigError(f"软漂移中心个数 {len(centers)} 与桶数 {n_buckets} 不一致")
        return SoftSchedule(tuple(centers), float(drift.get('d', 0.02)), bool(drift.get('normalize_time', True)))
    raise ConfigError(f"未知的漂移模式 {mode!r}")


class BucketSampler:
    """数据流循环持有的桶采样器，软漂移时使用自己的随机数生成器"""

    def __init__(self, schedule: DriftSchedule, n_steps: int, rng: np.random.Generator):
        self.schedule = schedule
        self.n_steps = n_steps
        self.rng = rng

    def probs(self, t: int) -> Optional[np.ndarray]:
        if isinstance(self.schedule, SoftSchedule):
            return soft_bucket_probs(t, self.n_steps, self.schedule)
        return None

    def bucket_at(self, t: int) -> int:
        if isinstance(self.schedule, HardSchedule):
            return hard_bucket(t, self.schedule)
        return sample_bucket(self.probs(t), self.rng)
