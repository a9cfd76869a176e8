#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Hoeffding 回归树
叶子上按特征维护等宽分箱的 (count, sum, sum²)，每累计 grace_period 个样本尝试一次按方差缩减的分裂，
最优与次优分裂之差超过 Hoeffding 界 ε = sqrt(R² ln(1/δ) / 2n) 或 ε < τ 时分裂
"""

import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from learners import FeatureVector, Regressor, check_features


class BinnedHistogram:
    """一个特征的等宽分箱统计；新值超出范围时相邻两箱合并、箱宽加倍"""

    def __init__(self, n_bins: int = 16, initial_width: float = 1.0):
        self.n_bins = n_bins
        self.initial_width = initial_width
        self.lo: Optional[float] = None
        self.width = initial_width
        self.count = np.zeros(n_bins)
        self.sum = np.zeros(n_bins)
        self.sumsq = np.zeros(n_bins)

    def _merge_up(self):
        """覆盖范围向上加倍：原来 16 箱合并到前 8 箱"""
        for stats in (self.count, self.sum, self.sumsq):
            merged = stats[0::2] + stats[1::2]
            stats[:] = 0.0
            stats[:self.n_bins // 2] = merged
        self.width *= 2.0

    def _merge_down(self):
        """覆盖范围向下加倍：原来 16 箱合并到后 8 箱"""
        for stats in (self.count, self.sum, self.sumsq):
            merged = stats[0::2] + stats[1::2]
            stats[:] = 0.0
            stats[self.n_bins // 2:] = merged
        self.lo -= self.width * self.n_bins
        self.width *= 2.0

    def add(self, value: float, target: float):
        self.add_stats(value, 1.0, target, target * target)

    def add_stats(self, value: float, count: float, total: float, total_sq: float):
        """把一组取值都是 value 的样本的汇总统计记入对应的箱"""
        if self.lo is None:
            self.lo = value - self.width / 2.0
        while value >= self.lo + self.width * self.n_bins:
            self._merge_up()
        while value < self.lo:
            self._merge_down()
        i = min(int((value - self.lo) / self.width), self.n_bins - 1)
        self.count[i] += count
        self.sum[i] += total
        self.sumsq[i] += total_sq

    def totals(self) -> Tuple[float, float, float]:
        return float(self.count.sum()), float(self.sum.sum()), float(self.sumsq.sum())

    def boundary(self, i: int) -> float:
        return self.lo + i * self.width

    def best_split(self) -> Optional[Tuple[float, float, Tuple[float, float, float], Tuple[float, float, float]]]:
        """返回 (方差缩减量, 阈值, 左侧统计, 右侧统计)；x < 阈值 去左边"""
        n = self.count.sum()
        if n == 0:
            return None
        total_var = _variance(n, self.sum.sum(), self.sumsq.sum())
        c_n, c_s, c_q = np.cumsum(self.count), np.cumsum(self.sum), np.cumsum(self.sumsq)
        best = None
        for i in range(1, self.n_bins):
            n_left = c_n[i - 1]
            n_right = n - n_left
            if n_left == 0 or n_right == 0:
                continue
            left = (n_left, c_s[i - 1], c_q[i - 1])
            right = (n_right, c_s[-1] - c_s[i - 1], c_q[-1] - c_q[i - 1])
            merit = total_var - (n_left / n) * _variance(*left) - (n_right / n) * _variance(*right)
            if best is None or merit > best[0]:
                best = (float(merit), self.boundary(i), tuple(map(float, left)), tuple(map(float, right)))
        return best

    def to_dict(self) -> Dict[str, Any]:
        return {'lo': self.lo, 'width': self.width, 'count': self.count.tolist(),
                'sum': self.sum.tolist(), 'sumsq': self.sumsq.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], n_bins: int, initial_width: float) -> 'BinnedHistogram':
        hist = cls(n_bins, initial_width)
        hist.lo = data['lo']
        hist.width = float(data['width'])
        hist.count = np.asarray(data['count'], dtype=float)
        hist.sum = np.asarray(data['sum'], dtype=float)
        hist.sumsq = np.asarray(data['sumsq'], dtype=float)
        return hist


def _variance(n: float, s: float, q: float) -> float:
    if n <= 0:
        return 0.0
    mean = s / n
    return max(q / n - mean * mean, 0.0)


class Node:
    """树节点；feature 为 None 时是叶子"""

    def __init__(self, depth: int = 0, count: float = 0.0, total: float = 0.0, total_sq: float = 0.0):
        self.depth = depth
        self.count = count
        self.total = total
        self.total_sq = total_sq
        self.seen_since_attempt = 0
        self.histograms: Dict[str, BinnedHistogram] = {}
        self.feature: Optional[str] = None
        self.threshold = 0.0
        self.split_bin_width = 0.0
        self.left: Optional['Node'] = None
        self.right: Optional['Node'] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count > 0 else 0.0

    def route(self, x: FeatureVector) -> 'Node':
        node = self
        while not node.is_leaf:
            node = node.left if x.get(node.feature, 0.0) < node.threshold else node.right
        return node

    def depth_below(self) -> int:
        if self.is_leaf:
            return self.depth
        return max(self.left.depth_below(), self.right.depth_below())

    def leaves(self) -> int:
        return 1 if self.is_leaf else self.left.leaves() + self.right.leaves()

    def to_dict(self, n_bins: int, initial_width: float) -> Dict[str, Any]:
        data = {'depth': self.depth, 'count': self.count, 'total': self.total, 'total_sq': self.total_sq,
                'seen_since_attempt': self.seen_since_attempt}
        if self.is_leaf:
            data['histograms'] = {k: h.to_dict() for k, h in self.histograms.items()}
        else:
            data.update({'feature': self.feature, 'threshold': self.threshold,
                         'split_bin_width': self.split_bin_width,
                         'left': self.left.to_dict(n_bins, initial_width),
                         'right': self.right.to_dict(n_bins, initial_width)})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], n_bins: int, initial_width: float) -> 'Node':
        node = cls(data['depth'], data['count'], data['total'], data['total_sq'])
        node.seen_since_attempt = int(data['seen_since_attempt'])
        if 'feature' in data:
            node.feature = data['feature']
            node.threshold = float(data['threshold'])
            node.split_bin_width = float(data['split_bin_width'])
            node.left = cls.from_dict(data['left'], n_bins, initial_width)
            node.right = cls.from_dict(data['right'], n_bins, initial_width)
        else:
            node.histograms = {k: BinnedHistogram.from_dict(h, n_bins, initial_width)
                               for k, h in data['histograms'].items()}
        return node


class HoeffdingTreeRegressor(Regressor):
    """流式回归树，叶子预测为落入该叶子的目标均值"""

    input_view = 'raw'

    def __init__(self, grace_period: int = 200, max_depth: int = 5, delta: float = 1e-5, tau: float = 0.05,
                 n_bins: int = 16, initial_bin_width: float = 1.0):
        self.grace_period = int(grace_period)
        self.max_depth = int(max_depth)
        self.delta = float(delta)
        self.tau = float(tau)
        self.n_bins = int(n_bins)
        self.initial_bin_width = float(initial_bin_width)
        self.root = Node()
        self.y_min = math.inf
        self.y_max = -math.inf
        self.n_splits = 0
        self.n_attempts = 0
        self.logger = logging.getLogger(__name__)

    @property
    def target_range(self) -> float:
        return self.y_max - self.y_min if self.y_max >= self.y_min else 0.0

    def depth(self) -> int:
        return self.root.depth_below()

    def predict(self, x: FeatureVector) -> float:
        leaf = self.root.route(x)
        if leaf.count > 0:
            return leaf.mean
        return self.root.mean

    def learn(self, x: FeatureVector, y: float) -> None:
        check_features(x, y)
        self.y_min = min(self.y_min, y)
        self.y_max = max(self.y_max, y)
        node = self.root
        while True:
            node.count += 1
            node.total += y
            node.total_sq += y * y
            if node.is_leaf:
                break
            node = node.left if x.get(node.feature, 0.0) < node.threshold else node.right

        # 叶子已知而 x 中没有的特征按 0.0 记入，与路由时的缺省值一致；
        # 新出现的特征先补上此前样本在 0.0 处的统计
        known = next(iter(node.histograms.values()), None)
        backlog = known.totals() if known is not None else None
        for name in node.histograms.keys() - x.keys():
            node.histograms[name].add(0.0, y)
        for name, value in x.items():
            hist = node.histograms.get(name)
            if hist is None:
                hist = node.histograms[name] = BinnedHistogram(self.n_bins, self.initial_bin_width)
                if backlog is not None and backlog[0] > 0:
                    hist.add_stats(0.0, *backlog)
            hist.add(value, y)
        node.seen_since_attempt += 1
        if node.seen_since_attempt >= self.grace_period and node.depth < self.max_depth:
            node.seen_since_attempt = 0
            self._attempt_split(node)

    def hoeffding_bound(self, n: float) -> float:
        r = self.target_range
        return math.sqrt(r * r * math.log(1.0 / self.delta) / (2.0 * n))

    def _attempt_split(self, leaf: Node):
        self.n_attempts += 1
        candidates = []
        for name in sorted(leaf.histograms):
            split = leaf.histograms[name].best_split()
            if split is not None:
                candidates.append((split[0], name, split))
        if not candidates:
            return
        candidates.sort(key=lambda c: (-c[0], c[1]))
        best_merit, feature, (_, threshold, left, right) = candidates[0]
        # 次优取其他特征中的最优分裂
        second_merit = candidates[1][0] if len(candidates) > 1 else 0.0
        if best_merit <= 0.0:
            return
        epsilon = self.hoeffding_bound(leaf.count)
        if best_merit - second_merit > epsilon or epsilon < self.tau:
            leaf.feature = feature
            leaf.threshold = threshold
            leaf.split_bin_width = leaf.histograms[feature].width
            leaf.left = Node(leaf.depth + 1, *left)
            leaf.right = Node(leaf.depth + 1, *right)
            leaf.histograms = {}
            self.n_splits += 1
            self.logger.debug(f"叶子在深度 {leaf.depth} 按 {feature} < {threshold:.4g} 分裂, "
                              f"增益 {best_merit:.4g}, ε = {epsilon:.4g}")

    def diagnostics(self) -> Dict[str, Any]:
        return {'splits': self.n_splits, 'depth': self.depth(), 'leaves': self.root.leaves()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'grace_period': self.grace_period, 'max_depth': self.max_depth, 'delta': self.delta,
            'tau': self.tau, 'n_bins': self.n_bins, 'initial_bin_width': self.initial_bin_width,
            'y_min': self.y_min if math.isfinite(self.y_min) else None,
            'y_max': self.y_max if math.isfinite(self.y_max) else None,
            'n_splits': self.n_splits, 'n_attempts': self.n_attempts,
            'root': self.root.to_dict(self.n_bins, self.initial_bin_width),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'HoeffdingTreeRegressor':
        tree = cls(data['grace_period'], data['max_depth'], data['delta'], data['tau'],
                   data['n_bins'], data['initial_bin_width'])
        tree.y_min = math.inf if data['y_min'] is None else float(data['y_min'])
        tree.y_max = -math.inf if data['y_max'] is None else float(data['y_max'])
        tree.n_splits = int(data['n_splits'])
        tree.n_attempts = int(data['n_attempts'])
        tree.root = Node.from_dict(data['root'], tree.n_bins, tree.initial_bin_width)
        return tree
