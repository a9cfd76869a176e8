#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
合成关系数据库
按模式生成带可控属性相关性的小型数据库，暴力计算真实基数，并给出基于属性值独立假设 (AVI) 的基线估计
"""

import json
import logging
import os
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from drift_bench import BucketAssignment, BucketSampler, DriftSchedule
from errors import DataError, ResourceLimitError, SchemaError, UnknownReferenceError
from plan_model import OPERATORS, Join, PlanRecord, Predicate

logger = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1
DEFAULT_AVI_EPSILON = 1e-9
DEFAULT_JOIN_BOUND = 10 ** 8
CORRELATION_MODES = ('independent', 'equal', 'noisy-copy')


@dataclass(frozen=True)
class AttributeSpec:
    """属性：取值域 [0, domain)，均匀或 zipf(s) 分布"""

    name: str
    domain: int
    distribution: str = 'uniform'
    zipf_s: float = 1.0

    def probabilities(self) -> Optional[np.ndarray]:
        if self.distribution == 'uniform':
            return None
        weights = 1.0 / np.arange(1, self.domain + 1, dtype=float) ** self.zipf_s
        return weights / weights.sum()

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        probabilities = self.probabilities()
        if probabilities is None:
            return rng.integers(0, self.domain, size=size, dtype=np.int64)
        return rng.choice(self.domain, size=size, p=probabilities).astype(np.int64)

    def to_dict(self) -> Dict[str, Any]:
        distribution: Union[str, Dict[str, float]] = self.distribution
        if self.distribution == 'zipf':
            distribution = {'zipf': self.zipf_s}
        return {'name': self.name, 'domain': self.domain, 'distribution': distribution}


@dataclass(frozen=True)
class RelationSpec:
    name: str
    row_count: int
    attributes: Tuple[AttributeSpec, ...]

    def attribute(self, name: str) -> AttributeSpec:
        for attribute in self.attributes:
            if attribute.name == name:
                return attribute
        raise UnknownReferenceError(f"关系 {self.name} 没有属性 {name}")


@dataclass(frozen=True)
class CorrelationSpec:
    """attr_b 与 attr_a 的关系：independent / equal / noisy-copy(p)"""

    relation: str
    attr_a: str
    attr_b: str
    mode: str = 'independent'
    p: float = 1.0


@dataclass(frozen=True)
class SynthSchema:
    """合成数据库模式"""

    relations: Tuple[RelationSpec, ...]
    correlations: Tuple[CorrelationSpec, ...] = ()
    join_keys: Tuple[Tuple[str, str], ...] = ()
    seed: int = 42

    def __post_init__(self):
        self.validate()

    def relation(self, name: str) -> RelationSpec:
        for relation in self.relations:
            if relation.name == name:
                return relation
        raise UnknownReferenceError(f"未知关系 {name}")

    def validate(self):
        names = [r.name for r in self.relations]
        if not names:
            raise SchemaError("模式中至少需要一个关系")
        if len(set(names)) != len(names):
            raise SchemaError(f"关系名重复: {names}")
        for relation in self.relations:
            if relation.row_count < 1:
                raise SchemaError(f"关系 {relation.name} 的行数必须 ≥ 1")
            attribute_names = [a.name for a in relation.attributes]
            if len(set(attribute_names)) != len(attribute_names):
                raise SchemaError(f"关系 {relation.name} 的属性名重复")
            for attribute in relation.attributes:
                if attribute.domain < 2:
                    raise SchemaError(f"属性 {relation.name}.{attribute.name} 的取值域必须 ≥ 2")
                if attribute.distribution not in ('uniform', 'zipf'):
                    raise SchemaError(f"属性 {relation.name}.{attribute.name} 的分布未知: {attribute.distribution}")
                if attribute.distribution == 'zipf' and not attribute.zipf_s > 0:
                    raise SchemaError(f"属性 {relation.name}.{attribute.name} 的 zipf 参数必须大于 0")
        for correlation in self.correlations:
            try:
                relation = self.relation(correlation.relation)
                a = relation.attribute(correlation.attr_a)
                b = relation.attribute(correlation.attr_b)
            except UnknownReferenceError as e:
                raise SchemaError(f"相关性引用了未声明的属性: {e}")
            if a.name == b.name:
                raise SchemaError(f"相关性两侧属性相同: {correlation.relation}.{a.name}")
            if correlation.mode not in CORRELATION_MODES:
                raise SchemaError(f"未知相关性模式 {correlation.mode!r}")
            if correlation.mode == 'equal' and a.domain != b.domain:
                raise SchemaError(f"equal 相关性要求两个属性取值域相同: {a.name}, {b.name}")
            if correlation.mode == 'noisy-copy' and not 0.0 <= correlation.p <= 1.0:
                raise SchemaError(f"noisy-copy 的 p 必须在 [0, 1] 内，实际为 {correlation.p}")
        for left, right in self.join_keys:
            for column in (left, right):
                relation_name, _, attribute_name = column.partition('.')
                try:
                    self.relation(relation_name).attribute(attribute_name)
                except UnknownReferenceError as e:
                    raise SchemaError(f"连接键引用了未声明的属性: {e}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SynthSchema':
        try:
            relations = []
            for r in data['relations']:
                attributes = []
                for a in r['attributes']:
                    distribution = a.get('distribution', 'uniform')
                    zipf_s = 1.0
                    if isinstance(distribution, dict):
                        zipf_s = float(distribution['zipf'])
                        distribution = 'zipf'
                    attributes.append(AttributeSpec(a['name'], int(a['domain']), distribution, zipf_s))
                relations.append(RelationSpec(r['name'], int(r['row_count']), tuple(attributes)))
            correlations = tuple(
                CorrelationSpec(c['relation'], c['a'], c['b'], c.get('mode', 'independent'), float(c.get('p', 1.0)))
                for c in data.get('correlations', [])
            )
            join_keys = tuple((str(left), str(right)) for left, right in data.get('join_keys', []))
            seed = int(data.get('seed', 42))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"模式文档格式错误: {e}")
        return cls(tuple(relations), correlations, join_keys, seed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'relations': [
                {'name': r.name, 'row_count': r.row_count, 'attributes': [a.to_dict() for a in r.attributes]}
                for r in self.relations
            ],
            'correlations': [
                {'relation': c.relation, 'a': c.attr_a, 'b': c.attr_b, 'mode': c.mode, 'p': c.p}
                for c in self.correlations
            ],
            'join_keys': [list(pair) for pair in self.join_keys],
        }

    @classmethod
    def load(cls, path: str) -> 'SynthSchema':
        """从 JSON 文件加载模式"""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise SchemaError(f"读取模式文件失败 {path}: {e}")
        return cls.from_dict(data)


class SynthDatabase:
    """按列存储的整数表，外加每个属性的取值频数直方图（即代价模型的元数据）"""

    def __init__(self, schema: SynthSchema, tables: Dict[str, Dict[str, np.ndarray]]):
        self.schema = schema
        self.tables = tables
        self.histograms: Dict[str, Dict[str, np.ndarray]] = {}
        for relation in schema.relations:
            self.histograms[relation.name] = {
                a.name: np.bincount(tables[relation.name][a.name], minlength=a.domain)
                for a in relation.attributes
            }

    def row_count(self, relation: str) -> int:
        return self.schema.relation(relation).row_count

    def column(self, relation: str, attribute: str) -> np.ndarray:
        try:
            return self.tables[relation][attribute]
        except KeyError:
            raise UnknownReferenceError(f"未知列 {relation}.{attribute}")

    def histogram(self, relation: str, attribute: str) -> np.ndarray:
        try:
            return self.histograms[relation][attribute]
        except KeyError:
            raise UnknownReferenceError(f"未知列 {relation}.{attribute}")

    def distinct(self, relation: str, attribute: str) -> int:
        return int(np.count_nonzero(self.histogram(relation, attribute)))

    def domain(self, relation: str, attribute: str) -> int:
        return self.schema.relation(relation).attribute(attribute).domain

    def save(self, path: str) -> None:
        """二进制快照：版本字节、头部长度 (uint32 LE)、JSON 头部、按头部顺序排列的 int32 LE 列"""
        layout = []
        payload = []
        for relation in self.schema.relations:
            for attribute in relation.attributes:
                layout.append([relation.name, attribute.name, relation.row_count])
                payload.append(self.tables[relation.name][attribute.name].astype('<i4').tobytes())
        header = json.dumps({'schema': self.schema.to_dict(), 'layout': layout},
                            ensure_ascii=False, separators=(',', ':')).encode('utf-8')
        with open(path, 'wb') as f:
            f.write(struct.pack('<BI', SNAPSHOT_VERSION, len(header)))
            f.write(header)
            for chunk in payload:
                f.write(chunk)
        logger.info(f"数据库快照已写入: {path}")

    @classmethod
    def load(cls, path: str) -> 'SynthDatabase':
        """读取 save 写出的快照"""
        with open(path, 'rb') as f:
            blob = f.read()
        version, header_length = struct.unpack_from('<BI', blob, 0)
        if version != SNAPSHOT_VERSION:
            raise DataError(f"不支持的快照版本 {version}")
        offset = struct.calcsize('<BI')
        header = json.loads(blob[offset:offset + header_length].decode('utf-8'))
        offset += header_length
        schema = SynthSchema.from_dict(header['schema'])
        tables: Dict[str, Dict[str, np.ndarray]] = {}
        for relation, attribute, rows in header['layout']:
            column = np.frombuffer(blob, dtype='<i4', count=rows, offset=offset).astype(np.int64)
            offset += rows * 4
            tables.setdefault(relation, {})[attribute] = column
        return cls(schema, tables)


def generate_database(schema: SynthSchema) -> SynthDatabase:
    """先按声明顺序独立生成所有列，再依次施加相关性；给定种子结果确定"""
    schema.validate()
    rng = np.random.default_rng(schema.seed)
    tables: Dict[str, Dict[str, np.ndarray]] = {}
    for relation in schema.relations:
        tables[relation.name] = {a.name: a.draw(rng, relation.row_count) for a in relation.attributes}

    for correlation in schema.correlations:
        relation = schema.relation(correlation.relation)
        columns = tables[relation.name]
        source = columns[correlation.attr_a]
        target_spec = relation.attribute(correlation.attr_b)
        if correlation.mode == 'equal':
            columns[correlation.attr_b] = source.copy()
        elif correlation.mode == 'noisy-copy':
            keep = rng.random(relation.row_count) < correlation.p
            redraw = target_spec.draw(rng, relation.row_count)
            columns[correlation.attr_b] = np.where(keep, source % target_spec.domain, redraw)

    db = SynthDatabase(schema, tables)
    logger.info(f"合成数据库已生成: {len(schema.relations)} 个关系, 种子 {schema.seed}")
    return db


def _compare(values: np.ndarray, operator: str, literal) -> np.ndarray:
    if operator == '=':
        return values == literal
    if operator == '<':
        return values < literal
    if operator == '<=':
        return values <= literal
    if operator == '>':
        return values > literal
    if operator == '>=':
        return values >= literal
    raise DataError(f"不支持的运算符 {operator!r}")


def _numeric_literal(predicate: Predicate):
    if isinstance(predicate.literal, str):
        raise DataError(f"合成数据库只支持数值字面量: {predicate.column} {predicate.operator} {predicate.literal!r}")
    return predicate.literal


def _check_relations(record: PlanRecord, db: SynthDatabase):
    for relation in record.relations:
        db.schema.relation(relation)


def avi_estimate(record: PlanRecord, db: SynthDatabase, epsilon: float = DEFAULT_AVI_EPSILON) -> float:
    """基表行数之积 × 各条件的直方图选择率 × 各连接的 1/max(distinct)，下限为 epsilon"""
    _check_relations(record, db)
    estimate = 1.0
    for relation in record.relations:
        estimate *= db.row_count(relation)
    for predicate in record.predicates:
        histogram = db.histogram(predicate.relation, predicate.attribute)
        values = np.arange(len(histogram))
        mask = _compare(values, predicate.operator, _numeric_literal(predicate))
        estimate *= histogram[mask].sum() / db.row_count(predicate.relation)
    for join in record.joins:
        left = db.distinct(*join.left)
        right = db.distinct(*join.right)
        estimate /= max(left, right, 1)
    return max(float(estimate), epsilon)


def _components(relations: Sequence[str], joins: Sequence[Join]) -> List[Tuple[List[str], List[Join]]]:
    """按连接图拆成连通分量"""
    parent = {r: r for r in relations}

    def find(r):
        while parent[r] != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        return r

    for join in joins:
        a, b = find(join.left[0]), find(join.right[0])
        if a != b:
            parent[max(a, b)] = min(a, b)

    groups: Dict[str, Tuple[List[str], List[Join]]] = {}
    for relation in relations:
        groups.setdefault(find(relation), ([], []))[0].append(relation)
    for join in joins:
        groups[find(join.left[0])][1].append(join)
    return [groups[key] for key in sorted(groups)]


def _hash_join(partial: Dict[str, np.ndarray], db: SynthDatabase, known: Tuple[str, str],
               new: Tuple[str, str], new_rows: np.ndarray, bound: int) -> Dict[str, np.ndarray]:
    left_values = db.column(*known)[partial[known[0]]]
    right_values = db.column(*new)[new_rows]
    order = np.argsort(right_values, kind='stable')
    right_sorted = right_values[order]
    lo = np.searchsorted(right_sorted, left_values, side='left')
    hi = np.searchsorted(right_sorted, left_values, side='right')
    counts = hi - lo
    total = int(counts.sum())
    if total > bound:
        raise ResourceLimitError(f"连接中间结果 {total} 行超过安全上限 {bound}")
    left_rep = np.repeat(np.arange(len(left_values)), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    right_pos = np.repeat(lo, counts) + offsets
    joined = {relation: rows[left_rep] for relation, rows in partial.items()}
    joined[new[0]] = new_rows[order[right_pos]]
    return joined


def true_cardinality(record: PlanRecord, db: SynthDatabase, bound: int = DEFAULT_JOIN_BOUND) -> int:
    """精确计数：各关系先按条件过滤，再逐个连接做等值匹配（与嵌套循环结果相同）"""
    _check_relations(record, db)
    rows: Dict[str, np.ndarray] = {}
    for relation in sorted(record.relations):
        mask = np.ones(db.row_count(relation), dtype=bool)
        for predicate in record.predicates:
            if predicate.relation == relation:
                mask &= _compare(db.column(relation, predicate.attribute), predicate.operator,
                                 _numeric_literal(predicate))
        rows[relation] = np.flatnonzero(mask)

    joins = sorted(record.joins, key=lambda j: (j.left, j.right))
    total = 1
    for relations, component_joins in _components(sorted(record.relations), joins):
        first = relations[0]
        partial = {first: rows[first]}
        remaining = list(component_joins)
        while remaining:
            for i, join in enumerate(remaining):
                left_in = join.left[0] in partial
                right_in = join.right[0] in partial
                if left_in or right_in:
                    break
            else:
                raise DataError("连接图不连通")
            join = remaining.pop(i)
            if left_in and right_in:
                keep = db.column(*join.left)[partial[join.left[0]]] == db.column(*join.right)[partial[join.right[0]]]
                partial = {relation: r[keep] for relation, r in partial.items()}
            elif left_in:
                partial = _hash_join(partial, db, join.left, join.right, rows[join.right[0]], bound)
            else:
                partial = _hash_join(partial, db, join.right, join.left, rows[join.left[0]], bound)
        total *= len(next(iter(partial.values())))
    return int(total)


@dataclass(frozen=True)
class PredicatePattern:
    """模板中的条件：literal 为 None 表示每次独立抽取，"$name" 表示同名占位符共用一次抽取"""

    relation: str
    attribute: str
    operator: str
    literal: Any = None


@dataclass(frozen=True)
class QueryTemplate:
    """查询模板"""

    template_id: str
    relations: Tuple[str, ...]
    joins: Tuple[Join, ...] = ()
    predicates: Tuple[PredicatePattern, ...] = ()
    bucket: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'QueryTemplate':
        try:
            joins = tuple(Join(tuple(j['left']), tuple(j['right'])) for j in data.get('joins', []))
            predicates = tuple(
                PredicatePattern(p['relation'], p['attribute'], p['operator'], p.get('literal'))
                for p in data.get('predicates', [])
            )
            for p in predicates:
                if p.operator not in OPERATORS:
                    raise ValueError(f"不支持的运算符 {p.operator!r}")
            bucket = data.get('bucket')
            return cls(str(data['template_id']), tuple(data['relations']), joins, predicates,
                       None if bucket is None else int(bucket))
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"查询模板格式错误: {e}")

    def instantiate(self, db: SynthDatabase, rng: np.random.Generator) -> Tuple[Predicate, ...]:
        """为占位符抽取字面量（在属性取值域上均匀抽取）"""
        shared: Dict[str, int] = {}
        predicates = []
        for pattern in self.predicates:
            literal = pattern.literal
            if literal is None:
                literal = int(rng.integers(0, db.domain(pattern.relation, pattern.attribute)))
            elif isinstance(literal, str) and literal.startswith('$'):
                if literal not in shared:
                    shared[literal] = int(rng.integers(0, db.domain(pattern.relation, pattern.attribute)))
                literal = shared[literal]
            predicates.append(Predicate(pattern.relation, pattern.attribute, pattern.operator, literal))
        return tuple(predicates)


def load_templates(path: str) -> List[QueryTemplate]:
    """模板文件是一个 JSON 数组"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"读取模板文件失败 {path}: {e}")
    return [QueryTemplate.from_dict(item) for item in data]


@dataclass
class WorkloadStep:
    step: int
    bucket: int
    template_id: str
    record: PlanRecord


class WorkloadGenerator:
    """工作负载生成器，缓存已计算过的真实基数"""

    def __init__(self, db: SynthDatabase, templates: Sequence[QueryTemplate], assignment: BucketAssignment,
                 avi_epsilon: float = DEFAULT_AVI_EPSILON, join_bound: int = DEFAULT_JOIN_BOUND,
                 max_cache_entries: int = 50000):
        self.db = db
        self.templates = list(templates)
        self.assignment = assignment
        self.avi_epsilon = avi_epsilon
        self.join_bound = join_bound
        self.logger = logging.getLogger(__name__)
        self._by_bucket: Dict[int, List[QueryTemplate]] = {}
        for template in self.templates:
            self._by_bucket.setdefault(assignment.bucket_of(template.template_id), []).append(template)
        self._cardinality_cache: Dict[Any, Tuple[float, int]] = {}
        self._max_cache_entries = max_cache_entries

    def _cardinalities(self, relations, joins, predicates) -> Tuple[float, int]:
        key = (frozenset(relations), frozenset(joins), frozenset(predicates))
        if key in self._cardinality_cache:
            return self._cardinality_cache[key]
        query = PlanRecord('query', frozenset(relations), frozenset(joins), predicates, 1.0, 0)
        value = (avi_estimate(query, self.db, self.avi_epsilon), true_cardinality(query, self.db, self.join_bound))
        self._add_to_cache(key, value)
        return value

    def _add_to_cache(self, key, value):
        """缓存满时移除最早加入的项"""
        if len(self._cardinality_cache) >= self._max_cache_entries:
            oldest_key = next(iter(self._cardinality_cache))
            del self._cardinality_cache[oldest_key]
        self._cardinality_cache[key] = value

    def generate(self, schedule: DriftSchedule, n: int, seed: int, start: int = 0) -> Iterator[WorkloadStep]:
        """逐步生成记录；start 之前的步只消耗随机数、不计算基数，便于断点续跑"""
        rng = np.random.default_rng(seed)
        sampler = BucketSampler(schedule, n, rng)
        for t in range(n):
            bucket = sampler.bucket_at(t)
            candidates = self._by_bucket.get(bucket)
            if not candidates:
                raise DataError(f"桶 {bucket} 中没有模板")
            template = candidates[int(rng.integers(0, len(candidates)))]
            predicates = template.instantiate(self.db, rng)
            if t < start:
                continue
            estimated, actual = self._cardinalities(template.relations, template.joins, predicates)
            record = PlanRecord(
                plan_id=f"{template.template_id}@{t}",
                relations=frozenset(template.relations),
                joins=frozenset(template.joins),
                predicates=predicates,
                estimated_cardinality=estimated,
                actual_cardinality=actual,
            )
            yield WorkloadStep(t, bucket, template.template_id, record)


def generate_workload(db: SynthDatabase, templates: Sequence[QueryTemplate], assignment: BucketAssignment,
                      sampler: DriftSchedule, n: int, seed: int, **kwargs) -> Iterator[WorkloadStep]:
    """生成 n 步工作负载：每步的桶由调度决定，记录带 ŷ = AVI 估计与 y = 真实基数"""
    return WorkloadGenerator(db, templates, assignment, **kwargs).generate(sampler, n, seed)


def default_schema(seed: int = 42) -> SynthSchema:
    """内置的三桶模式：r0 完全相关，r1 带噪复制，r2⋈r3 倾斜连接键"""
    return SynthSchema.from_dict({
        'seed': seed,
        'relations': [
            {'name': 'r0', 'row_count': 10000, 'attributes': [
                {'name': 'a', 'domain': 10}, {'name': 'b', 'domain': 10}, {'name': 'c', 'domain': 10}]},
            {'name': 'r1', 'row_count': 8000, 'attributes': [
                {'name': 'a', 'domain': 40}, {'name': 'b', 'domain': 40}, {'name': 'c', 'domain': 8}]},
            {'name': 'r2', 'row_count': 2000, 'attributes': [
                {'name': 'k', 'domain': 20, 'distribution': {'zipf': 1.1}},
                {'name': 'x', 'domain': 10}, {'name': 'y', 'domain': 10}]},
            {'name': 'r3', 'row_count': 1000, 'attributes': [
                {'name': 'k', 'domain': 20, 'distribution': {'zipf': 1.1}}, {'name': 'z', 'domain': 5}]},
        ],
        'correlations': [
            {'relation': 'r0', 'a': 'a', 'b': 'b', 'mode': 'equal'},
            {'relation': 'r1', 'a': 'a', 'b': 'b', 'mode': 'noisy-copy', 'p': 0.9},
            {'relation': 'r2', 'a': 'x', 'b': 'y', 'mode': 'noisy-copy', 'p': 0.5},
        ],
        'join_keys': [['r2.k', 'r3.k']],
    })


def default_templates() -> List[QueryTemplate]:
    """与 default_schema 配套的模板，每个桶三个"""
    join = {'left': ['r2', 'k'], 'right': ['r3', 'k']}
    items = [
        {'template_id': 'b0_pair', 'bucket': 0, 'relations': ['r0'], 'predicates': [
            {'relation': 'r0', 'attribute': 'a', 'operator': '=', 'literal': '$v'},
            {'relation': 'r0', 'attribute': 'b', 'operator': '=', 'literal': '$v'}]},
        {'template_id': 'b0_single', 'bucket': 0, 'relations': ['r0'], 'predicates': [
            {'relation': 'r0', 'attribute': 'a', 'operator': '='}]},
        {'template_id': 'b0_indep', 'bucket': 0, 'relations': ['r0'], 'predicates': [
            {'relation': 'r0', 'attribute': 'a', 'operator': '='},
            {'relation': 'r0', 'attribute': 'c', 'operator': '='}]},
        {'template_id': 'b1_pair', 'bucket': 1, 'relations': ['r1'], 'predicates': [
            {'relation': 'r1', 'attribute': 'a', 'operator': '=', 'literal': '$v'},
            {'relation': 'r1', 'attribute': 'b', 'operator': '=', 'literal': '$v'}]},
        {'template_id': 'b1_range', 'bucket': 1, 'relations': ['r1'], 'predicates': [
            {'relation': 'r1', 'attribute': 'c', 'operator': '<='}]},
        {'template_id': 'b1_indep', 'bucket': 1, 'relations': ['r1'], 'predicates': [
            {'relation': 'r1', 'attribute': 'a', 'operator': '='},
            {'relation': 'r1', 'attribute': 'c', 'operator': '='}]},
        {'template_id': 'b2_join', 'bucket': 2, 'relations': ['r2', 'r3'], 'joins': [join]},
        {'template_id': 'b2_join_pair', 'bucket': 2, 'relations': ['r2', 'r3'], 'joins': [join], 'predicates': [
            {'relation': 'r2', 'attribute': 'x', 'operator': '=', 'literal': '$v'},
            {'relation': 'r2', 'attribute': 'y', 'operator': '=', 'literal': '$v'}]},
        {'template_id': 'b2_join_filter', 'bucket': 2, 'relations': ['r2', 'r3'], 'joins': [join], 'predicates': [
            {'relation': 'r3', 'attribute': 'z', 'operator': '='}]},
    ]
    return [QueryTemplate.from_dict(item) for item in items]
