#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
driftsel - 在线学习基数估计修正系数
用法: python main.py {synth,bench,evaluate,import-explain,report,state} ...
"""

import sys
import os

# 添加src目录到Python路径
current_dir = os.path.dirname(os.path.abspath(__file__))
src_dir = os.path.join(current_dir, 'src')
sys.path.insert(0, src_dir)

from cli import main

if __name__ == '__main__':
    sys.exit(main())
