# -*- coding: utf-8 -*-
"""命令行子命令与退出码"""

import json
import os

import pandas as pd
import pytest

from cli import main
from prequential import REPORT_COLUMNS
from synth import SynthDatabase


def _bench_config(tmp_path, **updates):
    config = {
        'seed': 3,
        'n_steps': 90,
        'warmup_size': 20,
        'progress_every': 30,
        'output_dir': str(tmp_path / 'run'),
        'pipelines': [{'strategy': 'global'}, {'strategy': 'model:batch_linear'}],
    }
    config.update(updates)
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(config), encoding='utf-8')
    return str(path)


class TestImportExplain:

    def test_stdout_matches_golden(self, fixture_path, capsys):
        assert main(['import-explain', fixture_path('explain_join1.json'), '--id', 'join1']) == 0
        with open(fixture_path('explain_join1.jsonl'), encoding='utf-8') as f:
            assert capsys.readouterr().out == f.read()

    def test_write_to_file(self, fixture_path, tmp_path):
        out = str(tmp_path / 'plans.jsonl')
        assert main(['import-explain', fixture_path('explain_scan.json'), '--id', 'scan', '--out', out]) == 0
        with open(out, encoding='utf-8') as a, open(fixture_path('explain_scan.jsonl'), encoding='utf-8') as b:
            assert a.read() == b.read()

    def test_default_id_is_file_name(self, fixture_path, capsys):
        main(['import-explain', fixture_path('explain_scan.json')])
        assert json.loads(capsys.readouterr().out.splitlines()[0])['plan_id'] == 'explain_scan#0'

    def test_broken_document_exit_code(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text('[{"Plan": ', encoding='utf-8')
        assert main(['import-explain', str(path)]) == 3

    def test_missing_file_exit_code(self, tmp_path):
        assert main(['import-explain', str(tmp_path / 'absent.json')]) == 3


class TestEvaluate:

    def test_report_written(self, fixture_path, tmp_path, capsys):
        out = str(tmp_path / 'report.csv')
        assert main(['evaluate', fixture_path('explain_join3.jsonl'), '--strategy', 'global', '--out', out]) == 0
        frame = pd.read_csv(out)
        assert tuple(frame.columns) == REPORT_COLUMNS
        assert len(frame) == 7
        summary = json.loads(capsys.readouterr().out)
        assert summary['global']['q_raw']['count'] == 7

    def test_state_round_trip(self, fixture_path, tmp_path, capsys):
        state = str(tmp_path / 'state.json')
        first = str(tmp_path / 'first.csv')
        second = str(tmp_path / 'second.csv')
        assert main(['evaluate', fixture_path('explain_join1.jsonl'), '--strategy', 'model:fm',
                     '--out', first, '--save-state', state]) == 0
        capsys.readouterr()

        assert main(['state', 'dump', state]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info['next_step'] == 3
        assert info['pipelines'][0]['strategy'] == 'model:fm'
        assert info['pipelines'][0]['steps'] == 3

        assert main(['state', 'load', state]) == 0
        assert main(['evaluate', fixture_path('explain_join3.jsonl'), '--load-state', state, '--out', second]) == 0
        assert len(pd.read_csv(second)) == 7

    def test_malformed_plans_exit_code(self, tmp_path):
        plans = tmp_path / 'plans.jsonl'
        plans.write_text('{"plan_id": "x"\n', encoding='utf-8')
        assert main(['evaluate', str(plans), '--out', str(tmp_path / 'r.csv')]) == 3

    def test_unknown_strategy_exit_code(self, fixture_path, tmp_path):
        assert main(['evaluate', fixture_path('explain_scan.jsonl'), '--strategy', 'magic',
                     '--out', str(tmp_path / 'r.csv')]) == 2

    def test_bad_state_exit_code(self, tmp_path):
        path = tmp_path / 'state.json'
        path.write_text('{"version": 99}', encoding='utf-8')
        assert main(['state', 'dump', str(path)]) == 3


class TestReport:

    def test_plot_csv(self, tmp_path, capsys):
        csv = tmp_path / 'report_x.csv'
        pd.DataFrame({'step': range(100), 'q_raw': [2.0] * 100, 'q_corrected': [1.0] * 100}).to_csv(csv, index=False)
        assert main(['report', str(csv), '--boundaries', '50', '--points', '10']) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary['overall']['q_raw']['median'] == 2.0
        assert len(summary['segments']) == 2
        assert len(pd.read_csv(summary['plot_csv'])) == 10

    def test_missing_columns(self, tmp_path):
        csv = tmp_path / 'other.csv'
        pd.DataFrame({'a': [1]}).to_csv(csv, index=False)
        assert main(['report', str(csv)]) == 3


class TestSynth:

    def test_snapshot(self, tmp_path, capsys):
        out = str(tmp_path / 'db.bin')
        assert main(['synth', '--seed', '5', '--out', out]) == 0
        db = SynthDatabase.load(out)
        assert db.schema.seed == 5
        assert len(db.column('r0', 'a')) == json.loads(capsys.readouterr().out)['relations']['r0']

    def test_bad_schema_exit_code(self, tmp_path):
        schema = tmp_path / 'schema.json'
        schema.write_text('{"relations": []}', encoding='utf-8')
        assert main(['synth', '--schema', str(schema), '--out', str(tmp_path / 'db.bin')]) == 3


class TestBench:

    def test_small_run(self, tmp_path, capsys):
        assert main(['bench', '--config', _bench_config(tmp_path)]) == 0
        run = tmp_path / 'run'
        for name in ('report_global.csv', 'report_model_batch_linear.csv', 'summary.json', 'state.json',
                     'run_config.json', 'driftsel.log'):
            assert (run / name).exists()
        assert 'global' in capsys.readouterr().out
        assert len(pd.read_csv(run / 'report_global.csv')) == 90

    def test_single_strategy_override(self, tmp_path):
        out = tmp_path / 'only'
        assert main(['bench', '--config', _bench_config(tmp_path), '--strategy', 'model:fm',
                     '--output-dir', str(out)]) == 0
        reports = sorted(name for name in os.listdir(out) if name.startswith('report_'))
        assert reports == ['report_model_fm.csv']

    def test_bad_config_exit_code(self, tmp_path):
        assert main(['bench', '--config', _bench_config(tmp_path, n_steps=0)]) == 2

    def test_out_of_range_learner_parameter_exit_code(self, tmp_path):
        pipelines = [{'strategy': 'model:bayes_drift', 'params': {'gamma': 1.5}}]
        assert main(['bench', '--config', _bench_config(tmp_path, pipelines=pipelines)]) == 2

    def test_resume_without_state(self, tmp_path):
        assert main(['bench', '--config', _bench_config(tmp_path), '--resume']) == 3

    @pytest.mark.parametrize('argv', [['bench', '--config', 'x', '--bogus'], ['nothing']])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit):
            main(argv)
