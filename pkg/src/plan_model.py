#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
执行计划数据模型
定义 (子)计划观测记录、计划树，负责 JSON-lines 计划流的解析与序列化，以及子计划枚举
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from errors import PlanParseError, PlanValidationError

Literal = Union[int, float, str]

OPERATORS = ('=', '<', '<=', '>', '>=')
NODE_KINDS = ('scan', 'filter', 'join')

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Predicate:
    """过滤条件 relation.attribute <op> literal"""

    relation: str
    attribute: str
    operator: str
    literal: Literal

    def __post_init__(self):
        if not self.relation or not self.attribute:
            raise PlanValidationError('predicates', '关系名和属性名不能为空')
        if self.operator not in OPERATORS:
            raise PlanValidationError('predicates', f'不支持的运算符 {self.operator!r}')
        if isinstance(self.literal, bool) or not isinstance(self.literal, (int, float, str)):
            raise PlanValidationError('predicates', f'字面量类型非法: {self.literal!r}')
        if isinstance(self.literal, float) and not math.isfinite(self.literal):
            raise PlanValidationError('predicates', '字面量必须是有限数')

    @property
    def column(self) -> str:
        return f"{self.relation}.{self.attribute}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            'relation': self.relation,
            'attribute': self.attribute,
            'operator': self.operator,
            'literal': self.literal,
        }


@dataclass(frozen=True)
class Join:
    """等值连接条件，较小的一侧总是存为 left，保证唯一表示"""

    left: Tuple[str, str]
    right: Tuple[str, str]

    def __post_init__(self):
        left, right = tuple(self.left), tuple(self.right)
        if len(left) != 2 or len(right) != 2 or not all(left) or not all(right):
            raise PlanValidationError('joins', '连接两侧必须是 (relation, attribute)')
        if left == right:
            raise PlanValidationError('joins', f'连接两侧相同: {left}')
        if right < left:
            left, right = right, left
        object.__setattr__(self, 'left', left)
        object.__setattr__(self, 'right', right)

    @property
    def signature(self) -> str:
        return f"{self.left[0]}.{self.left[1]}={self.right[0]}.{self.right[1]}"

    def to_dict(self) -> Dict[str, Any]:
        return {'left': list(self.left), 'right': list(self.right)}


@dataclass(frozen=True)
class OpaquePredicate:
    """无法解析成 Predicate 的原始条件表达式，只用作目标编码的键"""

    relation: str
    expression: str

    def to_dict(self) -> Dict[str, Any]:
        return {'relation': self.relation, 'expression': self.expression}


@dataclass(frozen=True)
class PlanRecord:
    """一次 (子)计划观测：估计基数 ŷ 与实际基数 y"""

    plan_id: str
    relations: FrozenSet[str]
    joins: FrozenSet[Join]
    predicates: Tuple[Predicate, ...]
    estimated_cardinality: float
    actual_cardinality: int
    opaque_predicates: Tuple[OpaquePredicate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'relations', frozenset(self.relations))
        object.__setattr__(self, 'joins', frozenset(self.joins))
        object.__setattr__(self, 'predicates', tuple(self.predicates))
        object.__setattr__(self, 'opaque_predicates', tuple(self.opaque_predicates))

        if not self.relations:
            raise PlanValidationError('relations', '至少需要一个关系')
        est = self.estimated_cardinality
        if isinstance(est, bool) or not isinstance(est, (int, float)) or not math.isfinite(est) or est <= 0:
            raise PlanValidationError('estimated_cardinality', f'必须是大于 0 的有限数，实际为 {est!r}')
        act = self.actual_cardinality
        if isinstance(act, bool) or not isinstance(act, int) or act < 0:
            raise PlanValidationError('actual_cardinality', f'必须是非负整数，实际为 {act!r}')
        for join in self.joins:
            for relation, _ in (join.left, join.right):
                if relation not in self.relations:
                    raise PlanValidationError('joins', f'连接引用了未知关系 {relation!r}')
        for predicate in self.predicates:
            if predicate.relation not in self.relations:
                raise PlanValidationError('predicates', f'条件引用了未知关系 {predicate.relation!r}')
        for opaque in self.opaque_predicates:
            if opaque.relation not in self.relations:
                raise PlanValidationError('opaque_predicates', f'条件引用了未知关系 {opaque.relation!r}')

    @property
    def n_joins(self) -> int:
        return len(self.joins)


@dataclass(frozen=True)
class PlanTree:
    """物理计划树节点：scan / filter / join"""

    kind: str
    estimated_rows: float
    actual_rows: int
    relation: Optional[str] = None
    predicates: Tuple[Predicate, ...] = ()
    joins: Tuple[Join, ...] = ()
    opaque_predicates: Tuple[OpaquePredicate, ...] = ()
    children: Tuple['PlanTree', ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'children', tuple(self.children))
        if self.kind not in NODE_KINDS:
            raise PlanValidationError('kind', f'未知节点类型 {self.kind!r}')
        if self.kind == 'join' and len(self.children) != 2:
            raise PlanValidationError('children', 'join 节点必须恰好有两个子节点')
        if self.kind != 'join' and len(self.children) > 1:
            raise PlanValidationError('children', f'{self.kind} 节点最多一个子节点')
        if self.kind == 'scan' and not self.relation:
            raise PlanValidationError('relation', 'scan 节点必须指明关系')
        if self.actual_rows < 0:
            raise PlanValidationError('actual_rows', '实际行数不能为负')

    def node_count(self) -> int:
        return 1 + sum(child.node_count() for child in self.children)

    def walk(self) -> Iterator['PlanTree']:
        """先序遍历"""
        yield self
        for child in self.children:
            yield from child.walk()


def _literal_from_json(value: Any) -> Literal:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise PlanValidationError('predicates', f'字面量类型非法: {value!r}')
    return value


def record_from_dict(data: Dict[str, Any]) -> PlanRecord:
    """把已解码的 JSON 对象转换成 PlanRecord"""
    if not isinstance(data, dict):
        raise PlanValidationError('record', '每行必须是一个 JSON 对象')
    required = ('plan_id', 'relations', 'joins', 'predicates',
                'estimated_cardinality', 'actual_cardinality')
    for name in required:
        if name not in data:
            raise PlanValidationError(name, '缺少字段')
    unknown = set(data) - set(required) - {'opaque_predicates'}
    if unknown:
        raise PlanValidationError(sorted(unknown)[0], '未知字段')

    if not isinstance(data['relations'], list) or not all(isinstance(r, str) and r for r in data['relations']):
        raise PlanValidationError('relations', '必须是非空字符串列表')
    try:
        joins = [Join(tuple(j['left']), tuple(j['right'])) for j in data['joins']]
    except (TypeError, KeyError) as e:
        raise PlanValidationError('joins', f'格式错误: {e}')
    try:
        predicates = [
            Predicate(p['relation'], p['attribute'], p['operator'], _literal_from_json(p['literal']))
            for p in data['predicates']
        ]
    except (TypeError, KeyError) as e:
        raise PlanValidationError('predicates', f'格式错误: {e}')
    try:
        opaque = [OpaquePredicate(o['relation'], o['expression']) for o in data.get('opaque_predicates', [])]
    except (TypeError, KeyError) as e:
        raise PlanValidationError('opaque_predicates', f'格式错误: {e}')

    estimated = data['estimated_cardinality']
    if isinstance(estimated, int) and not isinstance(estimated, bool):
        estimated = float(estimated)
    return PlanRecord(
        plan_id=str(data['plan_id']),
        relations=frozenset(data['relations']),
        joins=frozenset(joins),
        predicates=tuple(predicates),
        estimated_cardinality=estimated,
        actual_cardinality=data['actual_cardinality'],
        opaque_predicates=tuple(opaque),
    )


def parse_plan_jsonl(line: str) -> PlanRecord:
    """解析计划流中的一行"""
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        offset = len(line[:e.pos].encode('utf-8'))
        raise PlanParseError(f"JSON 语法错误: {e.msg}", offset)
    return record_from_dict(data)


def record_to_dict(record: PlanRecord) -> Dict[str, Any]:
    """字段顺序固定，集合字段排序后输出"""
    data = {
        'plan_id': record.plan_id,
        'relations': sorted(record.relations),
        'joins': [j.to_dict() for j in sorted(record.joins, key=lambda j: (j.left, j.right))],
        'predicates': [p.to_dict() for p in record.predicates],
        'estimated_cardinality': float(record.estimated_cardinality),
        'actual_cardinality': record.actual_cardinality,
    }
    if record.opaque_predicates:
        data['opaque_predicates'] = [o.to_dict() for o in record.opaque_predicates]
    return data


def serialize_plan(record: PlanRecord) -> str:
    """序列化为一行 JSON（不含换行符）"""
    return json.dumps(record_to_dict(record), ensure_ascii=False, separators=(',', ':'))


def read_plan_stream(lines: Iterable[str]) -> Iterator[PlanRecord]:
    """逐行解析计划流，跳过空行"""
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_plan_jsonl(line)
        except (PlanParseError, PlanValidationError) as e:
            logger.error(f"计划流第 {number} 行解析失败: {e}")
            raise


def enumerate_subplans(tree: PlanTree, base_id: str = 'plan') -> List[PlanRecord]:
    """每个节点生成一条记录，记录内容是以该节点为根的子树的展开，先序输出"""
    records = []
    for index, node in enumerate(tree.walk()):
        relations = set()
        joins = []
        predicates = []
        opaque = []
        for sub in node.walk():
            if sub.relation:
                relations.add(sub.relation)
            joins.extend(sub.joins)
            predicates.extend(sub.predicates)
            opaque.extend(sub.opaque_predicates)

        # 引用子树之外关系的条件（例如嵌套循环的参数化索引条件）不属于该子计划
        kept_joins = [j for j in joins if j.left[0] in relations and j.right[0] in relations]
        kept_predicates = [p for p in predicates if p.relation in relations]
        kept_opaque = [o for o in opaque if o.relation in relations]
        dropped = len(joins) + len(predicates) + len(opaque) - len(kept_joins) - len(kept_predicates) - len(kept_opaque)
        if dropped:
            logger.debug(f"子计划 {base_id}#{index} 丢弃了 {dropped} 个越界条件")

        records.append(PlanRecord(
            plan_id=f"{base_id}#{index}",
            relations=frozenset(relations),
            joins=frozenset(kept_joins),
            predicates=tuple(dict.fromkeys(kept_predicates)),
            estimated_cardinality=max(float(node.estimated_rows), 1e-9),
            actual_cardinality=int(node.actual_rows),
            opaque_predicates=tuple(dict.fromkeys(kept_opaque)),
        ))
    return records
