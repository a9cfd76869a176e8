#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志配置
控制台输出，外加可选的 UTF-8 日志文件
"""

import logging
import os
from typing import Optional

import psutil

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str = 'INFO', log_file: Optional[str] = None) -> None:
    """配置根日志记录器；重复调用会替换之前的处理器"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(getattr(logging, level.upper(), logging.INFO))

    formatter = logging.Formatter(LOG_FORMAT)
    console = logging.StreamHandler()
    console.setFormatter(formatter)
    root.addHandler(console)

    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)


def memory_usage_mb() -> float:
    """当前进程的常驻内存 (MB)"""
    return psutil.Process(os.getpid()).memory_info().rss / (1024 * 1024)
