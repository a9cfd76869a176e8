#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
异常定义
所有模块共用的异常层次，每个异常类带有命令行退出码
"""


class DriftselError(Exception):
    """所有异常的基类"""

    exit_code = 1


class ConfigError(DriftselError):
    """运行配置错误"""

    exit_code = 2


class DataError(DriftselError):
    """输入数据错误"""

    exit_code = 3


class PlanParseError(DataError):
    """计划流语法错误，带字节偏移"""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (字节偏移 {offset})")
        self.offset = offset


class PlanValidationError(DataError):
    """计划记录不满足不变式，带字段名"""

    def __init__(self, field: str, message: str):
        super().__init__(f"字段 {field} 校验失败: {message}")
        self.field = field


class ExplainImportError(DataError):
    """EXPLAIN 文档导入失败，带 JSON 路径"""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class SchemaError(DataError):
    """合成数据库模式非法"""


class UnknownReferenceError(DataError, KeyError):
    """引用了数据库中不存在的关系或属性"""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ResourceLimitError(DataError):
    """暴力计数超出安全上限"""


class NumericError(DriftselError):
    """数值计算失败"""

    exit_code = 4


class BatchFitError(NumericError):
    """批量回归方程组奇异"""


class SingularPrecisionError(NumericError):
    """贝叶斯精度矩阵奇异"""


class LearnerInputError(DriftselError, ValueError):
    """学习器收到非有限输入"""

    exit_code = 4
