#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
PostgreSQL EXPLAIN 导入器
把 EXPLAIN (ANALYZE, FORMAT JSON) 文档转换成计划树，过滤条件和连接条件尽量解析成结构化对象，
解析不了的表达式原样保留为不透明条件
"""

import json
import logging
import re
from typing import Any, Dict, List, Optional, Tuple

from errors import ExplainImportError, PlanValidationError
from plan_model import Join, OpaquePredicate, PlanTree, Predicate

logger = logging.getLogger(__name__)

# 只起物理作用、基数等同于子节点的算子
PASS_THROUGH_NODES = {
    'Hash', 'Sort', 'Incremental Sort', 'Materialize', 'Memoize', 'Gather', 'Gather Merge',
    'Aggregate', 'Limit', 'Unique', 'WindowAgg', 'Result', 'Subquery Scan', 'LockRows',
}
JOIN_NODES = {'Nested Loop', 'Hash Join', 'Merge Join'}
JOIN_CONDITION_KEYS = ('Hash Cond', 'Merge Cond', 'Join Filter')
SCAN_CONDITION_KEYS = ('Index Cond', 'Recheck Cond', 'Filter')

_COMPARISON = re.compile(r'^(.+?)\s+(<=|>=|<>|!=|=|<|>)\s+(.+)$')
_COLUMN = re.compile(r'^(?:(\w+)\.)?"?(\w+)"?(?:::[\w ]+(?:\[\])?)?$')
_STRING_LITERAL = re.compile(r"^'((?:[^']|'')*)'(?:::[\w ]+)?$")
_NUMBER_LITERAL = re.compile(r'^(-?\d+(?:\.\d+)?)(?:::[\w ]+)?$')
_CAST_SUFFIX = re.compile(r'::[\w ]+(?:\[\])?$')


def _strip_parens(text: str) -> str:
    """去掉包住整个表达式的成对括号"""
    text = text.strip()
    while text.startswith('(') and text.endswith(')'):
        depth = 0
        for i, ch in enumerate(text):
            if ch == '(':
                depth += 1
            elif ch == ')':
                depth -= 1
            if depth == 0 and i < len(text) - 1:
                return text
        text = text[1:-1].strip()
    return text


def split_conjuncts(expression: str) -> List[str]:
    """按顶层 AND 拆分，保留每个子表达式的原文"""
    text = _strip_parens(expression)
    parts = []
    depth = 0
    in_string = False
    start = 0
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "'":
            in_string = not in_string
        elif not in_string:
            if ch == '(':
                depth += 1
            elif ch == ')':
                depth -= 1
            elif depth == 0 and text.startswith(' AND ', i):
                parts.append(text[start:i].strip())
                start = i + 5
                i += 5
                continue
        i += 1
    parts.append(text[start:].strip())
    return [p for p in parts if p]


def _parse_column(text: str) -> Optional[Tuple[Optional[str], str]]:
    # ((kind)::text = ...) 这类带类型转换的列引用
    text = _CAST_SUFFIX.sub('', _strip_parens(text))
    match = _COLUMN.match(_strip_parens(text))
    if not match:
        return None
    return match.group(1), match.group(2)


def _parse_literal(text: str):
    text = _strip_parens(text)
    match = _STRING_LITERAL.match(text)
    if match:
        return match.group(1).replace("''", "'")
    match = _NUMBER_LITERAL.match(text)
    if match:
        number = match.group(1)
        return float(number) if '.' in number else int(number)
    return None


class ExplainImporter:
    """EXPLAIN 文档导入器"""

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.aliases: Dict[str, str] = {}

    def import_document(self, document: str) -> PlanTree:
        """导入 JSON 文本"""
        try:
            data = json.loads(document)
        except json.JSONDecodeError as e:
            raise ExplainImportError('$', f'不是合法的 JSON: {e.msg}')

        if isinstance(data, list):
            if not data:
                raise ExplainImportError('$', '文档为空数组')
            data, path = data[0], '$[0]'
        else:
            path = '$'
        if not isinstance(data, dict) or 'Plan' not in data:
            raise ExplainImportError(path, '缺少 "Plan" 键')

        root = data['Plan']
        self.aliases = {}
        self._collect_aliases(root)
        tree, pending = self._convert(root, f'{path}.Plan')
        if tree is None:
            raise ExplainImportError(f'{path}.Plan', '计划中没有可识别的扫描节点')
        if pending:
            self.logger.debug(f"有 {len(pending)} 个连接条件没有找到所属的连接节点")
        return tree

    def _collect_aliases(self, node: Dict[str, Any]):
        if 'Relation Name' in node:
            relation = node['Relation Name']
            self.aliases[node.get('Alias', relation)] = relation
            self.aliases.setdefault(relation, relation)
        for child in node.get('Plans', []):
            self._collect_aliases(child)

    def _rows(self, node: Dict[str, Any], path: str) -> Tuple[float, int]:
        # Plan Rows 与 Actual Rows 都是每次循环的行数，不乘 Actual Loops
        if 'Plan Rows' not in node:
            raise ExplainImportError(path, '缺少 "Plan Rows" 键')
        if 'Actual Rows' not in node:
            raise ExplainImportError(path, '缺少 "Actual Rows" 键，文档不是 EXPLAIN ANALYZE 的输出')
        return float(node['Plan Rows']), int(round(float(node['Actual Rows'])))

    def _resolve(self, alias: Optional[str], default_relation: Optional[str]) -> Optional[str]:
        if alias is None:
            return default_relation
        return self.aliases.get(alias)

    def _parse_conditions(self, expression: str, default_relation: Optional[str]):
        """解析条件表达式，返回 (predicates, joins, opaque)"""
        predicates, joins, opaque = [], [], []

        if ' OR ' in expression:
            if default_relation:
                opaque.append(OpaquePredicate(default_relation, _strip_parens(expression)))
            return predicates, joins, opaque

        for conjunct in split_conjuncts(expression):
            text = _strip_parens(conjunct)
            parsed = False
            match = _COMPARISON.match(text)
            if match:
                left, operator, right = match.groups()
                column = _parse_column(left)
                relation = self._resolve(column[0], default_relation) if column else None
                if column and relation:
                    literal = _parse_literal(right)
                    other = _parse_column(right) if literal is None else None
                    other_relation = self._resolve(other[0], None) if other and other[0] else None
                    try:
                        if literal is not None and operator in ('=', '<', '<=', '>', '>='):
                            predicates.append(Predicate(relation, column[1], operator, literal))
                            parsed = True
                        elif other_relation and operator == '=':
                            joins.append(Join((relation, column[1]), (other_relation, other[1])))
                            parsed = True
                    except PlanValidationError:
                        parsed = False
            if not parsed:
                owner = default_relation
                column = _parse_column(match.group(1)) if match else None
                if column and column[0]:
                    owner = self._resolve(column[0], default_relation)
                if owner:
                    opaque.append(OpaquePredicate(owner, text))
                else:
                    self.logger.debug(f"无法归属的条件被忽略: {text}")
        return predicates, joins, opaque

    def _convert(self, node: Dict[str, Any], path: str) -> Tuple[Optional[PlanTree], List[Join]]:
        """递归转换，返回 (子树, 尚未挂到连接节点上的连接条件)"""
        if not isinstance(node, dict):
            raise ExplainImportError(path, '节点必须是 JSON 对象')
        node_type = node.get('Node Type', '')
        estimated, actual = self._rows(node, path)
        children = node.get('Plans', [])

        if 'Relation Name' in node:
            relation = node['Relation Name']
            predicates, joins, opaque = [], [], []
            for key in SCAN_CONDITION_KEYS:
                if key == 'Recheck Cond' and 'Index Cond' in node:
                    continue
                if key in node:
                    p, j, o = self._parse_conditions(node[key], relation)
                    predicates.extend(p)
                    joins.extend(j)
                    opaque.extend(o)
            tree = PlanTree('scan', estimated, actual, relation=relation,
                            predicates=tuple(dict.fromkeys(predicates)),
                            opaque_predicates=tuple(dict.fromkeys(opaque)))
            return tree, joins

        converted = []
        pending: List[Join] = []
        for i, child in enumerate(children):
            sub, sub_pending = self._convert(child, f'{path}.Plans[{i}]')
            pending.extend(sub_pending)
            if sub is not None:
                converted.append(sub)

        if node_type in JOIN_NODES or 'Join Type' in node:
            if len(converted) != 2:
                raise ExplainImportError(path, f'连接节点 {node_type} 需要两个输入')
            predicates, joins, opaque = [], list(pending), []
            for key in JOIN_CONDITION_KEYS:
                if key in node:
                    p, j, o = self._parse_conditions(node[key], None)
                    predicates.extend(p)
                    joins.extend(j)
                    opaque.extend(o)
            tree = PlanTree('join', estimated, actual,
                            predicates=tuple(dict.fromkeys(predicates)),
                            joins=tuple(dict.fromkeys(joins)),
                            opaque_predicates=tuple(dict.fromkeys(opaque)),
                            children=tuple(converted))
            return tree, []

        if not converted:
            raise ExplainImportError(path, f'不支持的叶子节点类型 {node_type!r}')
        if len(converted) > 1:
            raise ExplainImportError(path, f'不支持的多输入节点类型 {node_type!r}')

        child = converted[0]
        if 'Filter' in node:
            relations = {n.relation for n in child.walk() if n.relation}
            default_relation = next(iter(relations)) if len(relations) == 1 else None
            predicates, joins, opaque = self._parse_conditions(node['Filter'], default_relation)
            tree = PlanTree('filter', estimated, actual,
                            predicates=tuple(dict.fromkeys(predicates)),
                            joins=tuple(dict.fromkeys(joins)),
                            opaque_predicates=tuple(dict.fromkeys(opaque)),
                            children=(child,))
            return tree, pending

        if node_type not in PASS_THROUGH_NODES:
            self.logger.debug(f"{path}: 未知算子 {node_type!r} 按透传处理")
        return child, pending


def import_postgres_explain(document: str) -> PlanTree:
    """导入一个 EXPLAIN (ANALYZE, FORMAT JSON) 文档"""
    return ExplainImporter().import_document(document)
