# -*- coding: utf-8 -*-
"""修正目标、全局/分段修正系数与修正器"""

import math

import pytest

from correction import (Corrector, GlobalFactor, SegmentedFactors, correct, parse_strategy, target_of,
                        update_global)
from errors import ConfigError


class TestTarget:

    def test_underestimate(self, make_record):
        assert target_of(make_record(estimated=10, actual=100)) == pytest.approx(2.302585, abs=1e-6)

    def test_zero_actual_is_clamped(self, make_record):
        assert target_of(make_record(estimated=4, actual=0)) == pytest.approx(math.log(0.25))

    def test_exact_estimate(self, make_record):
        assert target_of(make_record(estimated=50, actual=50)) == 0.0


class TestGlobalFactor:

    def test_neutral_before_updates(self):
        assert GlobalFactor().factor == 1.0

    def test_mean_of_ratios(self, make_record):
        factor = GlobalFactor()
        update_global(factor, make_record(estimated=10, actual=20))
        update_global(factor, make_record(estimated=10, actual=40))
        assert factor.factor == pytest.approx(3.0)

    def test_constant_ratio(self, make_record):
        factor = GlobalFactor()
        for _ in range(7):
            update_global(factor, make_record(estimated=4, actual=10))
        assert factor.factor == pytest.approx(2.5)


class TestSegmentedFactors:

    def test_unseen_join_count_falls_back(self, make_record):
        factors = SegmentedFactors()
        factors.update(make_record(['t'], estimated=10, actual=50))
        assert factors.factor_for(0) == pytest.approx(5.0)
        assert factors.factor_for(3) == pytest.approx(5.0)

    def test_segments_are_separate(self, make_record):
        factors = SegmentedFactors()
        factors.update(make_record(['t'], estimated=10, actual=20))
        factors.update(make_record(['t', 'u'], joins=[(('t', 'x'), ('u', 'y'))], estimated=10, actual=80))
        assert factors.factor_for(0) == pytest.approx(2.0)
        assert factors.factor_for(1) == pytest.approx(8.0)
        assert factors.factor_for(2) == pytest.approx(5.0)


class TestStrategy:

    @pytest.mark.parametrize('text, expected', [
        ('none', 'none'), ('global', 'global'), ('per-join', 'per-join'),
        ('per_join_count', 'per-join'), ('model:fm', 'model:fm'),
    ])
    def test_parse(self, text, expected):
        assert str(parse_strategy(text)) == expected

    @pytest.mark.parametrize('text', ['model:', 'magic', ''])
    def test_reject(self, text):
        with pytest.raises(ConfigError):
            parse_strategy(text)


class TestCorrector:

    def test_none_passthrough(self, make_record):
        assert correct(make_record(estimated=10), Corrector(parse_strategy('none'))) == 10.0

    def test_global(self, make_record):
        corrector = Corrector(parse_strategy('global'))
        corrector.update(make_record(estimated=10, actual=20))
        corrector.update(make_record(estimated=10, actual=40))
        assert correct(make_record(estimated=10), corrector) == pytest.approx(30.0)

    def test_model_log_space(self, make_record):
        corrector = Corrector(parse_strategy('model:linear'))
        assert correct(make_record(estimated=10), corrector, math.log(10)) == pytest.approx(100.0)

    def test_model_factor_is_clamped(self, make_record):
        corrector = Corrector(parse_strategy('model:linear'))
        corrected, factor = corrector.correct(make_record(estimated=10), 50.0)
        assert factor == 1e4
        assert corrected == pytest.approx(1e5)
        _, factor = corrector.correct(make_record(estimated=10), -50.0)
        assert factor == 1e-4

    def test_result_at_least_one_row(self, make_record):
        corrector = Corrector(parse_strategy('model:linear'))
        assert correct(make_record(estimated=0.5), corrector, -3.0) == 1.0

    def test_bad_range(self):
        with pytest.raises(ConfigError):
            Corrector(parse_strategy('global'), factor_min=2.0)

    def test_state_restores(self, make_record):
        corrector = Corrector(parse_strategy('per-join'))
        corrector.update(make_record(['t'], estimated=10, actual=30))
        restored = Corrector.from_dict(corrector.to_dict())
        record = make_record(['t'], estimated=7)
        assert correct(record, restored) == correct(record, corrector)
