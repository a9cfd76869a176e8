# -*- coding: utf-8 -*-
"""Hoeffding 回归树"""

import numpy as np
import pytest

from hoeffding_tree import BinnedHistogram, HoeffdingTreeRegressor


def _batch_best_feature(xs, ys):
    """同一批数据上按方差缩减选特征（逐阈值枚举）"""
    best = None
    total = np.var(ys)
    for name in xs:
        values = np.asarray(xs[name])
        for threshold in np.unique(values)[1:]:
            left = ys[values < threshold]
            right = ys[values >= threshold]
            merit = total - (len(left) * np.var(left) + len(right) * np.var(right)) / len(ys)
            if best is None or merit > best[0]:
                best = (merit, name)
    return best[1]


class TestBinnedHistogram:

    def test_first_value_centered(self):
        hist = BinnedHistogram(n_bins=16, initial_width=1.0)
        hist.add(3.0, 1.0)
        assert hist.lo == 2.5
        assert hist.count[0] == 1

    def test_range_doubles_upward(self):
        hist = BinnedHistogram(n_bins=4, initial_width=1.0)
        hist.add(0.5, 1.0)
        hist.add(5.0, 2.0)
        assert hist.width == 2.0
        assert hist.count.sum() == 2
        assert hist.sum.sum() == 3.0

    def test_range_doubles_downward(self):
        hist = BinnedHistogram(n_bins=4, initial_width=1.0)
        hist.add(0.5, 1.0)
        hist.add(-3.0, 2.0)
        assert hist.lo <= -3.0
        assert hist.width == 2.0
        assert hist.count.sum() == 2

    def test_add_stats_matches_repeated_add(self):
        one, bulk = BinnedHistogram(), BinnedHistogram()
        for y in (1.0, 2.0, 4.0):
            one.add(0.0, y)
        bulk.add_stats(0.0, 3.0, 7.0, 21.0)
        assert bulk.totals() == one.totals() == (3.0, 7.0, 21.0)
        assert bulk.lo == one.lo

    def test_best_split_separates_step(self):
        hist = BinnedHistogram(n_bins=16, initial_width=1.0)
        for v in np.repeat(np.arange(10) + 0.5, 10):
            hist.add(float(v), 1.0 if v >= 5.0 else 0.0)
        merit, threshold, left, right = hist.best_split()
        assert merit == pytest.approx(0.25)
        assert left[0] == 50 and right[0] == 50


class TestHoeffdingTree:

    def test_single_leaf_during_grace_period(self):
        rng = np.random.default_rng(0)
        tree = HoeffdingTreeRegressor()
        ys = []
        for _ in range(199):
            y = float(rng.normal())
            ys.append(y)
            tree.learn({'x': float(rng.uniform(0, 10))}, y)
        assert tree.root.is_leaf
        assert tree.n_attempts == 0
        assert tree.predict({'x': 3.0}) == pytest.approx(np.mean(ys))

    def test_step_function_split(self):
        rng = np.random.default_rng(1)
        tree = HoeffdingTreeRegressor()
        xs = {'x': [], 'noise': []}
        ys = []
        for _ in range(10000):
            x, noise = float(rng.uniform(0, 10)), float(rng.uniform(0, 10))
            y = 1.0 if x >= 5.0 else 0.0
            tree.learn({'x': x, 'noise': noise}, y)
            if len(ys) < 200:
                xs['x'].append(x)
                xs['noise'].append(noise)
                ys.append(y)
        assert tree.root.feature == _batch_best_feature(xs, np.asarray(ys)) == 'x'
        assert abs(tree.root.threshold - 5.0) <= tree.root.split_bin_width
        assert tree.predict({'x': 8.0, 'noise': 1.0}) > 0.9
        assert tree.predict({'x': 1.0, 'noise': 1.0}) < 0.1

    def test_depth_cap(self):
        rng = np.random.default_rng(2)
        tree = HoeffdingTreeRegressor(grace_period=50)
        for step in range(50000):
            x = rng.uniform(-5, 5, size=3)
            y = float(np.sin(x[0]) * x[1] + x[2] ** 2 + rng.normal(0, 0.1))
            tree.learn({'a': float(x[0]), 'b': float(x[1]), 'c': float(x[2])}, y)
            if step % 1000 == 0:
                assert tree.depth() <= 5
        assert tree.depth() <= 5
        assert tree.n_splits > 0

    def test_split_decision_uses_tie_threshold(self):
        tree = HoeffdingTreeRegressor(delta=1e-5, tau=0.05)
        tree.y_min, tree.y_max = 0.0, 1.0
        assert tree.hoeffding_bound(200) == pytest.approx(np.sqrt(np.log(1e5) / 400))
        assert tree.hoeffding_bound(10 ** 6) < 0.05

    def test_empty_tree_predicts_zero(self):
        assert HoeffdingTreeRegressor().predict({'x': 1.0}) == 0.0

    def test_missing_feature_counts_as_zero(self):
        rng = np.random.default_rng(4)
        tree = HoeffdingTreeRegressor()
        missing = 0
        for i in range(6000):
            if i % 2:
                f = float(rng.uniform(5, 15))
                tree.learn({'g': 1.0, 'f': f}, 1.0 if f >= 10.0 else 0.0)
            else:
                tree.learn({'g': 1.0}, 5.0)
                missing += 1
        assert tree.root.feature == 'f'
        assert 0.0 < tree.root.threshold <= 5.0
        assert tree.root.left.count == missing
        assert tree.predict({'g': 1.0}) == pytest.approx(5.0)
        assert tree.predict({'g': 1.0, 'f': 12.0}) > 0.4
        assert tree.predict({'g': 1.0, 'f': 6.0}) < 0.6

    def test_new_feature_backfilled_at_zero(self):
        tree = HoeffdingTreeRegressor()
        tree.learn({'g': 1.0}, 2.0)
        tree.learn({'g': 1.0}, 3.0)
        tree.learn({'g': 1.0, 'f': 7.0}, 1.0)
        hist = tree.root.histograms['f']
        assert hist.totals() == tree.root.histograms['g'].totals() == (3.0, 6.0, 14.0)
        assert hist.count[int((0.0 - hist.lo) / hist.width)] == 2.0
