#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
文件工具模块
输出目录、原子写入，以及计划 JSON-lines 文件的读写
"""

import json
import logging
import os
import tempfile
from typing import Any, Iterable, Iterator, List

import pandas as pd

from plan_model import PlanRecord, read_plan_stream, serialize_plan


def ensure_dir(path: str) -> str:
    """确保目录存在并返回其绝对路径"""
    path = os.path.abspath(path)
    os.makedirs(path, exist_ok=True)
    return path


def atomic_write_text(path: str, text: str) -> None:
    """先写临时文件再替换，中途失败不会留下半个文件"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(temp_path, path)
    except Exception as e:
        logging.error(f"写入文件失败 {path}: {e}")
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def write_json(path: str, data: Any) -> None:
    atomic_write_text(path, json.dumps(data, ensure_ascii=False, indent=2, sort_keys=False) + '\n')


def read_json(path: str) -> Any:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_csv(path: str, frame: pd.DataFrame) -> None:
    """报告 CSV：浮点数用 repr 精度，保证同一次运行重复写出的字节完全相同"""
    atomic_write_text(path, frame.to_csv(index=False, lineterminator='\n', float_format='%.17g'))


def read_plans(path: str) -> Iterator[PlanRecord]:
    """逐条读取计划 JSON-lines 文件"""
    with open(path, 'r', encoding='utf-8') as f:
        yield from read_plan_stream(f)


def write_plans(path: str, records: Iterable[PlanRecord]) -> int:
    lines: List[str] = [serialize_plan(r) for r in records]
    atomic_write_text(path, ''.join(line + '\n' for line in lines))
    logging.info(f"已写出 {len(lines)} 条计划记录: {path}")
    return len(lines)
