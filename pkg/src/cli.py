#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行入口
子命令: synth / bench / evaluate / import-explain / report / state
"""

import argparse
import json
import logging
import os
from typing import List, Optional

from benchmark import report_from_csv, run_benchmark
from config_manager import ConfigManager
from errors import DriftselError
from explain_importer import import_postgres_explain
from file_utils import ensure_dir, read_plans, write_csv, write_plans
from log_setup import setup_logging
from plan_model import enumerate_subplans, serialize_plan
from prequential import CorrectionPipeline, build_report, summarize
from state_store import describe_state, dump_state, load_state
from synth import SynthSchema, default_schema, generate_database

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='driftsel', description='在概念漂移下在线学习基数估计修正系数')
    parser.add_argument('--log-level', default='INFO', help='日志级别 (默认 INFO)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('synth', help='生成合成数据库快照')
    p.add_argument('--schema', help='模式 JSON 文件，不给时使用内置模式')
    p.add_argument('--seed', type=int, help='覆盖模式中的种子')
    p.add_argument('--out', required=True, help='快照输出路径')

    p = sub.add_parser('bench', help='运行完整基准')
    p.add_argument('--config', help='运行配置 JSON，不给时使用程序目录下的 config.json')
    p.add_argument('--strategy', help='只运行一条流水线: none / global / per-join / model:<学习器>')
    p.add_argument('--output-dir', help='覆盖配置中的 output_dir')
    p.add_argument('--resume', action='store_true', help='从输出目录中的状态快照继续运行')

    p = sub.add_parser('evaluate', help='在计划 JSON-lines 流上做先预测后学习的评估')
    p.add_argument('plans', help='计划 JSON-lines 文件')
    p.add_argument('--strategy', default='model:fm', help='修正策略 (默认 model:fm)')
    p.add_argument('--seed', type=int, default=42)
    p.add_argument('--window', type=int, help='滑动窗口，默认为记录数的 1/60')
    p.add_argument('--load-state', help='从状态快照恢复流水线')
    p.add_argument('--save-state', help='评估结束后保存状态快照')
    p.add_argument('--out', required=True, help='报告 CSV 路径')

    p = sub.add_parser('import-explain', help='EXPLAIN (ANALYZE, FORMAT JSON) → 计划 JSON-lines')
    p.add_argument('file', help='EXPLAIN JSON 文件')
    p.add_argument('--out', help='输出文件，不给时写到标准输出')
    p.add_argument('--id', dest='base_id', help='计划编号前缀，默认取文件名')

    p = sub.add_parser('report', help='从报告 CSV 重新计算汇总并写出降采样 CSV')
    p.add_argument('csv', help='报告 CSV')
    p.add_argument('--boundaries', type=int, nargs='*', default=[], help='分段边界（步）')
    p.add_argument('--points', type=int, default=500, help='降采样后的行数上限')
    p.add_argument('--out', help='降采样 CSV 路径')

    p = sub.add_parser('state', help='查看或校验状态快照')
    p.add_argument('action', choices=['dump', 'load'])
    p.add_argument('path', help='状态快照路径')
    return parser


def cmd_synth(args) -> int:
    schema = SynthSchema.load(args.schema) if args.schema else default_schema()
    if args.seed is not None:
        schema = SynthSchema(schema.relations, schema.correlations, schema.join_keys, args.seed)
    db = generate_database(schema)
    db.save(args.out)
    print(json.dumps({'out': args.out, 'relations': {r.name: r.row_count for r in schema.relations}},
                     ensure_ascii=False))
    return 0


def cmd_bench(args) -> int:
    manager = ConfigManager(args.config or 'config.json')
    updates = {}
    if args.output_dir:
        updates['output_dir'] = args.output_dir
    if args.strategy:
        updates['pipelines'] = [{'name': args.strategy.replace(':', '_'), 'strategy': args.strategy, 'params': {}}]
    if updates:
        manager.update_config(updates)
    config = manager.get_config()
    output_dir = ensure_dir(config['output_dir'])
    setup_logging(args.log_level, os.path.join(output_dir, 'driftsel.log'))
    summary = run_benchmark(config, resume=args.resume)
    for name, entry in summary['pipelines'].items():
        overall = entry['overall']['q_corrected']['median']
        print(f"{name}: 修正后 q-error 中位数 {overall:.4g}")
    return 0


def cmd_evaluate(args) -> int:
    if args.load_state:
        pipelines, _, _ = load_state(args.load_state)
    else:
        pipelines = [CorrectionPipeline.from_spec({'strategy': args.strategy}, seed=args.seed)]
    records = list(read_plans(args.plans))
    rows = {p.name: [] for p in pipelines}
    for step, record in enumerate(records):
        for pipeline in pipelines:
            row = pipeline.step(record, step)
            if row is not None:
                rows[pipeline.name].append(row)
    window = args.window or max(1, len(records) // 60)
    summary = {}
    root, ext = os.path.splitext(args.out)
    for pipeline in pipelines:
        frame = build_report(rows[pipeline.name], window)
        path = args.out if len(pipelines) == 1 else f"{root}_{pipeline.name}{ext or '.csv'}"
        write_csv(path, frame)
        summary[pipeline.name] = summarize(frame)['overall']
    if args.save_state:
        dump_state(args.save_state, pipelines, len(records))
    print(json.dumps(summary, ensure_ascii=False, indent=2))
    return 0


def cmd_import_explain(args) -> int:
    with open(args.file, 'r', encoding='utf-8') as f:
        tree = import_postgres_explain(f.read())
    base_id = args.base_id or os.path.splitext(os.path.basename(args.file))[0]
    records = enumerate_subplans(tree, base_id)
    if args.out:
        write_plans(args.out, records)
    else:
        for record in records:
            print(serialize_plan(record))
    return 0


def cmd_report(args) -> int:
    summary = report_from_csv(args.csv, args.boundaries, args.points, args.out)
    print(json.dumps(summary, ensure_ascii=False, indent=2))
    return 0


def cmd_state(args) -> int:
    info = describe_state(args.path)
    if args.action == 'load':
        print(f"状态快照可以恢复: {len(info['pipelines'])} 条流水线, 下一步 {info['next_step']}")
    else:
        print(json.dumps(info, ensure_ascii=False, indent=2))
    return 0


COMMANDS = {
    'synth': cmd_synth,
    'bench': cmd_bench,
    'evaluate': cmd_evaluate,
    'import-explain': cmd_import_explain,
    'report': cmd_report,
    'state': cmd_state,
}


def main(argv: Optional[List[str]] = None) -> int:
    """返回退出码: 0 成功, 2 配置错误, 3 数据错误, 4 数值错误"""
    args = build_parser().parse_args(argv)
    if args.command != 'bench':
        setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except DriftselError as e:
        logger.error(f"{args.command} 失败: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} 失败: {e}")
        return 3
