# -*- coding: utf-8 -*-
"""因子分解机：二阶项恒等式、梯度与隐向量初始化"""

import numpy as np
import pytest

from drift_bench import BucketAssignment, HardSchedule
from factorization_machine import FactorizationMachine
from prequential import CorrectionPipeline
from synth import QueryTemplate, SynthSchema, WorkloadGenerator, generate_database


def _naive_predict(model, x):
    names = [n for n, v in x.items() if v != 0.0]
    total = model.w0 + sum(model.weights.get(n, 0.0) * x[n] for n in names)
    zero = np.zeros(model.n_factors)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            total += float(model.latent.get(a, zero) @ model.latent.get(b, zero)) * x[a] * x[b]
    return total


def _random_state(rng, p, k=10):
    model = FactorizationMachine(n_factors=k)
    names = [f"f{i}" for i in range(p)]
    model.w0 = float(rng.normal())
    model.weights = {n: float(rng.normal()) for n in names}
    model.latent = {n: rng.normal(0.0, 0.5, k) for n in names}
    x = {n: float(v) for n, v in zip(names, rng.normal(size=p))}
    return model, x


class TestPredict:

    def test_single_pair(self):
        model = FactorizationMachine(n_factors=1)
        model.latent = {'a': np.array([1.0]), 'b': np.array([2.0])}
        assert model.predict({'a': 1.0, 'b': 1.0}) == pytest.approx(2.0)

    def test_single_active_feature_has_no_pairwise_term(self):
        model = FactorizationMachine(n_factors=3)
        model.w0 = 0.5
        model.weights = {'a': 2.0}
        model.latent = {'a': np.array([1.0, 1.0, 1.0])}
        assert model.predict({'a': 3.0}) == pytest.approx(6.5)

    def test_efficient_matches_double_loop(self):
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(1000):
            model, x = _random_state(rng, int(rng.integers(1, 17)))
            worst = max(worst, abs(model.predict(x) - _naive_predict(model, x)))
        assert worst < 1e-9

    def test_predict_does_not_initialize_latents(self):
        model = FactorizationMachine(seed=1)
        model.predict({'new': 1.0, 'other': 2.0})
        assert model.latent == {}


class TestGradient:

    def test_finite_differences(self):
        rng = np.random.default_rng(1)
        h = 1e-5
        for _ in range(100):
            model, x = _random_state(rng, int(rng.integers(2, 9)), k=4)
            d_w0, grad_w, grad_v = model.gradient(x)

            model.w0 += h
            up = model.predict(x)
            model.w0 -= 2 * h
            down = model.predict(x)
            model.w0 += h
            assert _rel_error(d_w0, (up - down) / (2 * h)) < 1e-4

            for name in x:
                model.weights[name] += h
                up = model.predict(x)
                model.weights[name] -= 2 * h
                down = model.predict(x)
                model.weights[name] += h
                assert _rel_error(grad_w[name], (up - down) / (2 * h)) < 1e-4

                for f in range(model.n_factors):
                    model.latent[name][f] += h
                    up = model.predict(x)
                    model.latent[name][f] -= 2 * h
                    down = model.predict(x)
                    model.latent[name][f] += h
                    assert _rel_error(grad_v[name][f], (up - down) / (2 * h)) < 1e-4


def _rel_error(analytic, numeric):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-3)


class TestLearn:

    def test_zero_init_stalls_pairwise_terms(self):
        model = FactorizationMachine(init_std=0.0)
        model.learn({'a': 1.0, 'b': 1.0}, 1.0)
        assert all(not np.any(v) for v in model.latent.values())
        assert model.weights['a'] != 0.0
        assert model.w0 != 0.0

    def test_seeded_initialization_is_reproducible(self):
        first, second = FactorizationMachine(seed=7), FactorizationMachine(seed=7)
        for model in (first, second):
            model.learn({'a': 1.0, 'b': 0.5}, 2.0)
        np.testing.assert_array_equal(first.latent['a'], second.latent['a'])
        assert np.any(first.latent['a'])

    def test_learns_interaction(self):
        rng = np.random.default_rng(2)
        model = FactorizationMachine(n_factors=4, learning_rate=0.05, seed=3)
        for a, b in rng.uniform(-1, 1, size=(20000, 2)):
            model.learn({'a': float(a), 'b': float(b)}, float(2.0 * a * b))
        assert model.predict({'a': 0.8, 'b': 0.8}) == pytest.approx(1.28, abs=0.15)


@pytest.mark.slow
class TestEqualColumnsWorkload:

    def test_beats_linear_model(self):
        # a 与 b 的字面量独立抽取：相等时真实基数是 AVI 估计的 d 倍，不等时为 0，只有二阶项能区分
        schema = SynthSchema.from_dict({
            'seed': 1,
            'relations': [{'name': 'r', 'row_count': 10000,
                           'attributes': [{'name': 'a', 'domain': 10}, {'name': 'b', 'domain': 10}]}],
            'correlations': [{'relation': 'r', 'a': 'a', 'b': 'b', 'mode': 'equal'}],
        })
        template = QueryTemplate.from_dict({'template_id': 'pair', 'relations': ['r'], 'predicates': [
            {'relation': 'r', 'attribute': 'a', 'operator': '='},
            {'relation': 'r', 'attribute': 'b', 'operator': '='}]})
        generator = WorkloadGenerator(generate_database(schema), [template], BucketAssignment({'pair': 0}, 1))
        records = [s.record for s in generator.generate(HardSchedule(()), 10000, seed=2)]

        late = {}
        for strategy in ('model:fm', 'model:linear'):
            pipeline = CorrectionPipeline.from_spec({'strategy': strategy}, seed=3)
            rows = [pipeline.step(record, step) for step, record in enumerate(records)]
            late[strategy] = np.mean([r.q_corrected for r in rows[-2000:]])
        assert late['model:fm'] < late['model:linear']
