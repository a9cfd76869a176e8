#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
状态快照
把整组修正流水线（编码器、词表、标准化器、修正系数、学习器）连同流位置保存为带版本号的 JSON，
用于暂停后继续运行
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

from errors import DataError
from file_utils import read_json, write_json
from prequential import CorrectionPipeline

STATE_VERSION = 1

logger = logging.getLogger(__name__)


def dump_state(path: str, pipelines: List[CorrectionPipeline], next_step: int = 0,
               config: Optional[Dict[str, Any]] = None) -> None:
    """写出快照"""
    data = {
        'version': STATE_VERSION,
        'next_step': next_step,
        'config': config,
        'pipelines': [p.to_dict() for p in pipelines],
    }
    write_json(path, data)
    logger.info(f"状态快照已保存: {path} (下一步 {next_step}, {len(pipelines)} 条流水线)")


def load_state(path: str) -> Tuple[List[CorrectionPipeline], int, Optional[Dict[str, Any]]]:
    """读取快照，返回 (流水线, 下一步, 运行配置)"""
    try:
        data = read_json(path)
    except (OSError, ValueError) as e:
        raise DataError(f"读取状态快照失败 {path}: {e}")
    version = data.get('version') if isinstance(data, dict) else None
    if version != STATE_VERSION:
        raise DataError(f"不支持的状态快照版本 {version!r}，当前版本为 {STATE_VERSION}")
    try:
        pipelines = [CorrectionPipeline.from_dict(p) for p in data['pipelines']]
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"状态快照内容损坏: {e}")
    return pipelines, int(data['next_step']), data.get('config')


def describe_state(path: str) -> Dict[str, Any]:
    """快照内容的概要，供命令行显示"""
    pipelines, next_step, config = load_state(path)
    return {
        'next_step': next_step,
        'seed': config.get('seed') if config else None,
        'pipelines': [
            {
                'name': p.name,
                'strategy': str(p.strategy),
                'frozen': p.frozen,
                'steps': p.steps,
                'encoder_keys': len(p.builder.encoder.counts),
                'one_hot_features': len(p.builder.vocabulary),
                'factors': p.factors(),
                'diagnostics': p.diagnostics(),
            }
            for p in pipelines
        ],
    }
