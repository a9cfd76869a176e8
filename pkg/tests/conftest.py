# -*- coding: utf-8 -*-
"""测试公共设置：与 main.py 一样把 src 加到导入路径"""

import os
import sys

import pytest

SRC_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src')
sys.path.insert(0, SRC_DIR)

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'fixtures')


@pytest.fixture
def fixture_path():
    def resolve(name):
        return os.path.join(FIXTURES, name)
    return resolve


@pytest.fixture
def make_record():
    """按简写构造 PlanRecord"""
    from plan_model import Join, PlanRecord, Predicate

    def build(relations=('t',), joins=(), predicates=(), estimated=10.0, actual=10, plan_id='p'):
        return PlanRecord(
            plan_id=plan_id,
            relations=frozenset(relations),
            joins=frozenset(Join(tuple(a), tuple(b)) for a, b in joins),
            predicates=tuple(Predicate(*p) for p in predicates),
            estimated_cardinality=float(estimated),
            actual_cardinality=int(actual),
        )
    return build
