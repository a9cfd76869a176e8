#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
依赖检查工具 - 确保所有必要的库都已安装
"""

import sys
import importlib

# (导入名, 包名, 用途)
REQUIRED_PACKAGES = [
    ('numpy', 'numpy', '数值计算'),
    ('pandas', 'pandas', '报告表与统计'),
    ('psutil', 'psutil', '内存占用统计'),
]
TEST_PACKAGES = [
    ('pytest', 'pytest', '测试'),
]


def check_packages(packages):
    """检查一组依赖，返回缺失的包名"""
    missing_packages = []
    for module_name, package_name, description in packages:
        try:
            module = importlib.import_module(module_name)
            version = getattr(module, '__version__', '?')
            print(f" {package_name:<10} {version:<10} - 已安装 ({description})")
        except ImportError:
            print(f" {package_name:<10} {'':<10} - 未安装 ({description})")
            missing_packages.append(package_name)
    return missing_packages


def main():
    """主函数"""
    if sys.stdout.encoding and sys.stdout.encoding.lower() != 'utf-8':
        sys.stdout.reconfigure(encoding='utf-8')

    print("driftsel - 依赖检查工具")
    print("=" * 60)

    python_version = sys.version_info
    print(f"Python版本: {python_version.major}.{python_version.minor}.{python_version.micro}")
    if python_version < (3, 8):
        print("警告: 需要 Python 3.8 或更高版本")

    print("\n运行依赖:")
    missing = check_packages(REQUIRED_PACKAGES)
    print("\n测试依赖:")
    missing_test = check_packages(TEST_PACKAGES)

    print("\n" + "=" * 60)
    if missing or missing_test:
        print(" 存在缺失的依赖，安装命令:")
        print(f"   pip install {' '.join(missing + missing_test)}")
    else:
        print(" 所有依赖都已正确安装! 运行命令: python main.py bench")
    print("=" * 60)
    return not missing


if __name__ == '__main__':
    sys.exit(0 if main() else 1)
