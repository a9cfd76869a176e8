#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
基准运行器
按运行配置生成合成数据库和漂移工作负载，让所有流水线逐步看到同一条流，写出报告 CSV 与汇总 JSON
"""

import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config_manager import validate_config
from drift_bench import BucketAssignment, HardSchedule, SoftSchedule, build_schedule, cluster_buckets
from errors import ConfigError, DataError
from file_utils import ensure_dir, read_json, write_csv, write_json
from log_setup import memory_usage_mb
from prequential import CorrectionPipeline, StepRow, build_report, summarize
from state_store import dump_state, load_state
from synth import (QueryTemplate, SynthSchema, WorkloadGenerator, default_schema, default_templates,
                   generate_database, load_templates)

STATE_FILE = 'state.json'
CHECKPOINT_ROWS_FILE = 'checkpoint_rows.json'


def report_path(output_dir: str, name: str) -> str:
    return os.path.join(output_dir, f"report_{name}.csv")


def schedule_boundaries(schedule, n_steps: int) -> List[int]:
    """汇总分段用的边界：硬切换点，或相邻软漂移中心的中点"""
    if isinstance(schedule, HardSchedule):
        return list(schedule.switch_points)
    scale = n_steps if schedule.normalize_time else 1.0
    centers = sorted(schedule.centers)
    return [int(round((a + b) / 2.0 * scale)) for a, b in zip(centers, centers[1:])]


def assign_buckets(templates: Sequence[QueryTemplate], n_buckets: int) -> BucketAssignment:
    """模板都自带桶编号时直接使用，否则按关系集合聚类"""
    if all(t.bucket is not None for t in templates):
        return BucketAssignment({t.template_id: t.bucket for t in templates}, n_buckets)
    return cluster_buckets(templates, n_buckets)


class BenchmarkRunner:
    """一次基准运行"""

    def __init__(self, config: Dict[str, Any]):
        self.config = validate_config(config)
        self.output_dir = ensure_dir(self.config['output_dir'])
        self.logger = logging.getLogger(__name__)
        self.pipelines: List[CorrectionPipeline] = []
        self.rows: Dict[str, List[StepRow]] = {}

    def _prepare(self):
        config = self.config
        if config['schema'] is None:
            schema = default_schema(config['seed'])
        else:
            schema = SynthSchema.load(config['schema'])
        self.db = generate_database(schema)
        self.templates = default_templates() if config['templates'] is None else load_templates(config['templates'])
        self.assignment = assign_buckets(self.templates, config['buckets'])
        self.schedule = build_schedule(config['drift'], config['n_steps'], config['buckets'])
        self.generator = WorkloadGenerator(self.db, self.templates, self.assignment,
                                           avi_epsilon=config['avi_epsilon'], join_bound=config['join_bound'])

    def _build_pipelines(self) -> List[CorrectionPipeline]:
        config = self.config
        return [
            CorrectionPipeline.from_spec(spec, seed=config['seed'],
                                         prior_weight=config['encoder']['prior_weight'],
                                         factor_min=config['correction']['factor_min'],
                                         factor_max=config['correction']['factor_max'])
            for spec in config['pipelines']
        ]

    def _warm_up(self):
        """批量对照只在桶 0 上预热，预热流使用独立的种子"""
        batch = [p for p in self.pipelines if p.needs_warmup]
        if not batch:
            return
        if self.config['warmup_size'] < 2:
            raise ConfigError("批量对照模型需要 warmup_size ≥ 2")
        warm = [s.record for s in self.generator.generate(HardSchedule(()), self.config['warmup_size'],
                                                          self.config['seed'] + 1)]
        for pipeline in batch:
            pipeline.warm_up(warm)

    def _resume(self) -> int:
        state_path = os.path.join(self.output_dir, STATE_FILE)
        if not os.path.exists(state_path):
            raise DataError(f"没有可以继续的状态快照: {state_path}")
        pipelines, next_step, saved = load_state(state_path)
        if saved is not None and saved != self.config:
            raise ConfigError("状态快照中的运行配置与当前配置不一致，无法继续")
        rows_data = read_json(os.path.join(self.output_dir, CHECKPOINT_ROWS_FILE))
        self.pipelines = pipelines
        self.rows = {name: [StepRow(**row) for row in rows] for name, rows in rows_data.items()}
        self.logger.info(f"从第 {next_step} 步继续运行")
        return next_step

    def _checkpoint(self, next_step: int):
        write_json(os.path.join(self.output_dir, CHECKPOINT_ROWS_FILE),
                   {name: [vars(r) for r in rows] for name, rows in self.rows.items()})
        dump_state(os.path.join(self.output_dir, STATE_FILE), self.pipelines, next_step, self.config)

    def run(self, resume: bool = False) -> Dict[str, Any]:
        config = self.config
        self._prepare()
        if resume:
            start = self._resume()
        else:
            self.pipelines = self._build_pipelines()
            self.rows = {p.name: [] for p in self.pipelines}
            self._warm_up()
            start = 0

        n_steps = config['n_steps']
        checkpoint_every = config['checkpoint_every']
        bucket_counts = np.zeros(config['buckets'], dtype=int)
        self.logger.info(f"开始运行: {n_steps} 步, {len(self.pipelines)} 条流水线, 种子 {config['seed']}")
        for item in self.generator.generate(self.schedule, n_steps, config['seed'], start=start):
            bucket_counts[item.bucket] += 1
            for pipeline in self.pipelines:
                row = pipeline.step(item.record, item.step, item.bucket)
                if row is not None:
                    self.rows[pipeline.name].append(row)
            done = item.step + 1
            if done % config['progress_every'] == 0:
                self.logger.info(f"进度 {done}/{n_steps}")
            if checkpoint_every and done % checkpoint_every == 0 and done < n_steps:
                self._checkpoint(done)

        summary = self._write_outputs(bucket_counts, start)
        self._checkpoint(n_steps)
        return summary

    def _write_outputs(self, bucket_counts: np.ndarray, start: int) -> Dict[str, Any]:
        config = self.config
        boundaries = schedule_boundaries(self.schedule, config['n_steps'])
        summary: Dict[str, Any] = {
            'n_steps': config['n_steps'],
            'seed': config['seed'],
            'boundaries': boundaries,
            'bucket_counts': bucket_counts.tolist() if start == 0 else None,
            'pipelines': {},
        }
        for pipeline in self.pipelines:
            rows = self.rows[pipeline.name]
            frame = build_report(rows, config['rolling_window'])
            write_csv(report_path(self.output_dir, pipeline.name), frame)
            entry = summarize(frame, boundaries)
            entry['strategy'] = str(pipeline.strategy)
            entry['us_per_step'] = 1e6 * pipeline.elapsed / pipeline.steps if pipeline.steps else None
            entry['diagnostics'] = pipeline.diagnostics()
            entry['factors'] = pipeline.factors()
            variances = [r.variance for r in rows if r.variance is not None]
            if variances:
                entry['mean_predictive_variance'] = float(np.mean(variances))
            summary['pipelines'][pipeline.name] = entry

        summary['rss_mb'] = memory_usage_mb()
        self.logger.info(f"常驻内存 {summary['rss_mb']:.1f} MB")
        write_json(os.path.join(self.output_dir, 'summary.json'), summary)
        write_json(os.path.join(self.output_dir, 'run_config.json'), config)
        self.logger.info(f"报告已写入 {self.output_dir}")
        return summary


def run_benchmark(config: Dict[str, Any], resume: bool = False) -> Dict[str, Any]:
    """按运行配置跑完整个基准，返回汇总"""
    return BenchmarkRunner(config).run(resume=resume)


def report_from_csv(csv_path: str, boundaries: Sequence[int] = (), points: int = 500,
                    out_path: Optional[str] = None) -> Dict[str, Any]:
    """从报告 CSV 重新计算汇总，并写出便于画图的降采样 CSV"""
    try:
        frame = pd.read_csv(csv_path)
    except (OSError, pd.errors.ParserError) as e:
        raise DataError(f"读取报告失败 {csv_path}: {e}")
    missing = {'step', 'q_raw', 'q_corrected'} - set(frame.columns)
    if missing:
        raise DataError(f"报告缺少列: {', '.join(sorted(missing))}")
    summary = summarize(frame, boundaries)
    stride = max(1, len(frame) // max(points, 1))
    if out_path is None:
        root, _ = os.path.splitext(csv_path)
        out_path = f"{root}_plot.csv"
    write_csv(out_path, frame.iloc[::stride].reset_index(drop=True))
    summary['plot_csv'] = out_path
    return summary
