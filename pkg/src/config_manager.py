#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置管理器
负责读取、校验和保存运行配置
"""

import copy
import json
import os
import sys
import logging
from typing import Dict, Any, List, Optional

from errors import ConfigError

DEFAULT_CONFIG: Dict[str, Any] = {
    "schema": None,
    "templates": None,
    "buckets": 3,
    "pipelines": [
        {"name": "global", "strategy": "global", "params": {}},
        {"name": "linear", "strategy": "model:linear", "params": {}},
    ],
    "drift": {"mode": "hard", "switch_fracs": [1 / 3, 2 / 3]},
    "n_steps": 30000,
    "warmup_size": 5000,
    "rolling_window": None,
    "seed": 42,
    "output_dir": "runs/latest",
    "encoder": {"prior_weight": 5.0},
    "correction": {"factor_min": 1e-4, "factor_max": 1e4},
    "avi_epsilon": 1e-9,
    "join_bound": 100000000,
    "progress_every": 5000,
    "checkpoint_every": None,
}

DRIFT_KEYS = {
    'hard': {'mode', 'switch_fracs', 'switch_points'},
    'soft': {'mode', 'd', 'centers', 'normalize_time'},
}
PIPELINE_KEYS = {'name', 'strategy', 'params'}


def app_dir() -> str:
    """程序运行目录"""
    if getattr(sys, 'frozen', False):
        # 打包后的可执行文件
        return os.path.dirname(sys.executable)
    return os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class ConfigManager:
    """配置管理器类"""

    def __init__(self, config_file: Optional[str] = 'config.json'):
        # 相对路径按程序运行目录解析；None 表示只用默认配置
        if config_file is not None and not os.path.isabs(config_file) and not os.path.exists(config_file):
            config_file = os.path.join(app_dir(), config_file)
        self.config_file = config_file
        self.logger = logging.getLogger(__name__)
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """加载配置文件，与默认配置合并后校验"""
        config = copy.deepcopy(DEFAULT_CONFIG)
        if self.config_file is not None:
            try:
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    loaded_config = json.load(f)
            except FileNotFoundError:
                raise ConfigError(f"配置文件不存在: {self.config_file}")
            except json.JSONDecodeError as e:
                raise ConfigError(f"配置文件不是合法的 JSON: {self.config_file}: {e}")
            if not isinstance(loaded_config, dict):
                raise ConfigError("配置文件的顶层必须是 JSON 对象")
            unknown = sorted(set(loaded_config) - set(DEFAULT_CONFIG))
            if unknown:
                raise ConfigError(f"配置中有未知的键: {', '.join(unknown)}")
            if 'seed' not in loaded_config:
                raise ConfigError("配置中必须给出 seed")
            config.update(loaded_config)
        return validate_config(config)

    def get_config(self) -> Dict[str, Any]:
        """获取配置"""
        return copy.deepcopy(self.config)

    def update_config(self, updates: Dict[str, Any]) -> None:
        """更新配置（重新校验，不写回文件）"""
        unknown = sorted(set(updates) - set(DEFAULT_CONFIG))
        if unknown:
            raise ConfigError(f"配置中有未知的键: {', '.join(unknown)}")
        merged = copy.deepcopy(self.config)
        merged.update(updates)
        self.config = validate_config(merged)

    def save_config(self, path: str) -> None:
        """把解析后的配置写到指定文件"""
        try:
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, ensure_ascii=False, indent=4)
        except OSError as e:
            self.logger.error(f"保存配置文件失败: {e}")
            raise

    def get(self, key: str, default=None):
        """获取单个配置项"""
        return self.config.get(key, default)


def _require_int(config: Dict[str, Any], key: str, minimum: int) -> int:
    value = config[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key} 必须是 ≥ {minimum} 的整数，实际为 {value!r}")
    return value


def _check_keys(section: Dict[str, Any], allowed, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} 必须是 JSON 对象")
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"{where} 中有未知的键: {', '.join(unknown)}")


def validate_config(config: Dict[str, Any]) -> Dict[str, Any]:
    """校验并补全运行配置，返回新字典"""
    config = copy.deepcopy(config)
    n_steps = _require_int(config, 'n_steps', 1)
    _require_int(config, 'buckets', 1)
    _require_int(config, 'warmup_size', 0)
    _require_int(config, 'progress_every', 1)
    _require_int(config, 'join_bound', 1)
    if isinstance(config['seed'], bool) or not isinstance(config['seed'], int):
        raise ConfigError(f"seed 必须是整数，实际为 {config['seed']!r}")
    if config['rolling_window'] is None:
        config['rolling_window'] = max(1, n_steps // 60)
    _require_int(config, 'rolling_window', 1)
    if config['checkpoint_every'] is not None:
        _require_int(config, 'checkpoint_every', 1)
    if not isinstance(config['avi_epsilon'], (int, float)) or not config['avi_epsilon'] > 0:
        raise ConfigError("avi_epsilon 必须大于 0")

    _check_keys(config['encoder'], DEFAULT_CONFIG['encoder'], 'encoder')
    config['encoder'] = {**DEFAULT_CONFIG['encoder'], **config['encoder']}
    if not config['encoder']['prior_weight'] >= 0:
        raise ConfigError("encoder.prior_weight 必须 ≥ 0")
    _check_keys(config['correction'], DEFAULT_CONFIG['correction'], 'correction')
    config['correction'] = {**DEFAULT_CONFIG['correction'], **config['correction']}

    drift = config['drift']
    if not isinstance(drift, dict) or drift.get('mode', 'hard') not in DRIFT_KEYS:
        raise ConfigError(f"drift.mode 必须是 hard 或 soft")
    _check_keys(drift, DRIFT_KEYS[drift.get('mode', 'hard')], 'drift')

    pipelines: List[Dict[str, Any]] = config['pipelines']
    if not isinstance(pipelines, list) or not pipelines:
        raise ConfigError("pipelines 至少需要一条流水线")
    names = []
    for i, spec in enumerate(pipelines):
        _check_keys(spec, PIPELINE_KEYS, f'pipelines[{i}]')
        if 'strategy' not in spec:
            raise ConfigError(f"pipelines[{i}] 缺少 strategy")
        spec.setdefault('name', spec['strategy'].replace(':', '_'))
        spec.setdefault('params', {})
        names.append(spec['name'])
    if len(set(names)) != len(names):
        raise ConfigError(f"流水线名称重复: {names}")
    return config
