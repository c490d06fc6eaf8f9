# -*- coding:utf-8 -*-
import csv
import json
import os

import numpy as np
import pytest

from fairsketch import NonFiniteLoss, load_checkpoint
from fairsketch import cli
from fairsketch.cli import main
from fairsketch.config import load_experiment_config

CONDITIONS = ('original', 'grayscale', 'sketch')


def write_config(path, **overrides):
    document = {
        'name': 'corpus',
        'dataset': {'kind': 'attribute_manifest', 'path': 'images/attributes.csv',
                    'label_attr': 'label', 'z_attr': 'group'},
        'train': {'layer_dims': [1, 8, 1], 'lambda': 1.0, 'learning_rate': 0.01, 'batch_size': 8,
                  'epochs': 3, 'seed': 11},
        'image_size': 8,
        'split_ratios': [0.5, 0.0, 0.5],
        'group_names': {'0': 'cool', '1': 'warm'},
        'output_dir': 'runs',
    }
    document.update(overrides)
    with open(path, 'w') as f:
        json.dump(document, f)
    return str(path)


@pytest.fixture
def experiment(tmp_path, png_corpus):
    return write_config(tmp_path / 'experiment.json')


class TestSketchifyCommand:

    def test_converts_corpus(self, tmp_path, png_corpus, capsys):
        out = str(tmp_path / 'sketches')
        assert main(['sketchify', '--in', png_corpus, '--out', out, '--mode', 'sketch']) == 0
        assert '60 converted' in capsys.readouterr().out
        assert os.path.exists(os.path.join(out, 'manifest.csv'))

    def test_manifest_stamp(self, tmp_path, png_corpus, experiment):
        hashes = {}
        for mode in ('sketch', 'grayscale'):
            out = str(tmp_path / mode)
            assert main(['--config', experiment, 'sketchify', '--in', png_corpus, '--out', out,
                         '--mode', mode]) == 0
            with open(os.path.join(out, 'manifest.csv')) as f:
                rows = list(csv.DictReader(f))
            assert {row['seed'] for row in rows} == {'11'}
            assert len({row['config_hash'] for row in rows}) == 1
            hashes[mode] = rows[0]['config_hash']
        assert len(hashes['sketch']) == 64
        assert hashes['sketch'] != hashes['grayscale']

        out = str(tmp_path / 'override')
        assert main(['--seed', '4', 'sketchify', '--in', png_corpus, '--out', out]) == 0
        with open(os.path.join(out, 'manifest.csv')) as f:
            assert {row['seed'] for row in csv.DictReader(f)} == {'4'}

    def test_empty_directory(self, tmp_path):
        (tmp_path / 'empty').mkdir()
        assert main(['sketchify', '--in', str(tmp_path / 'empty'), '--out', str(tmp_path / 'out')]) == 2


class TestTrainCommand:

    def test_schema(self, capsys):
        assert main(['train', '--schema']) == 0
        schema = json.loads(capsys.readouterr().out)
        assert schema['title'] == 'ExperimentConfig'

    def test_writes_artifacts(self, tmp_path, experiment):
        run_dir = str(tmp_path / 'run')
        assert main(['--config', experiment, 'train', '--condition', 'sketch', '--run-dir', run_dir]) == 0
        for name in ('checkpoint.json', 'history.csv', 'predictions.csv', 'report.json', 'config.json'):
            assert os.path.exists(os.path.join(run_dir, name))

        digest = load_experiment_config(experiment).with_overrides(condition='sketch').config_hash
        with open(os.path.join(run_dir, 'config.json')) as f:
            stored = json.load(f)
        assert stored['config_hash'] == digest and stored['seed'] == 11
        with open(os.path.join(run_dir, 'report.json')) as f:
            report = json.load(f)
        assert report['meta']['config_hash'] == digest
        assert report['meta']['condition'] == 'sketch'
        with open(os.path.join(run_dir, 'history.csv')) as f:
            history = list(csv.DictReader(f))
        assert [row['epoch'] for row in history] == ['1', '2', '3']
        assert {row['config_hash'] for row in history} == {digest}
        with open(os.path.join(run_dir, 'predictions.csv')) as f:
            predictions = list(csv.DictReader(f))
        assert len(predictions) == 30
        params = load_checkpoint(os.path.join(run_dir, 'checkpoint.json'))
        assert params.layer_dims == [64, 8, 1]

    def test_deterministic(self, tmp_path, experiment):
        for name in ('a', 'b'):
            assert main(['--config', experiment, 'train', '--run-dir', str(tmp_path / name)]) == 0
        with open(str(tmp_path / 'a' / 'checkpoint.json')) as a, open(str(tmp_path / 'b' / 'checkpoint.json')) as b:
            assert a.read() == b.read()

    def test_invalid_config(self, tmp_path, png_corpus):
        bad = write_config(tmp_path / 'bad.json', lr=0.1)
        assert main(['--config', bad, 'train']) == 2
        missing = write_config(tmp_path / 'missing.json',
                               dataset={'kind': 'features_csv', 'path': 'nowhere.csv'})
        assert main(['--config', missing, 'train']) == 2
        assert main(['train']) == 2

    def test_non_finite_exit_code(self, tmp_path, experiment, monkeypatch):
        def diverging(splits, config, on_epoch=None):
            raise NonFiniteLoss(1, 2, float('inf'))

        monkeypatch.setattr(cli, 'train', diverging)
        assert main(['--config', experiment, 'train', '--run-dir', str(tmp_path / 'run')]) == 3


class TestAuditCommand:

    def test_audit(self, tmp_path, capsys):
        log = tmp_path / 'log.csv'
        log.write_text('id,y_true,y_pred,score,z\n'
                       'a,1,1,,1\nb,1,0,,1\nc,0,1,,1\nd,0,0,,1\n'
                       'e,1,1,,0\nf,1,1,,0\ng,0,0,,0\nh,0,1,,0\n')
        assert main(['audit', str(log), '--out', str(tmp_path / 'audit')]) == 0
        assert 'SPD↓      0.2500' in capsys.readouterr().out
        with open(str(tmp_path / 'audit' / 'report.json')) as f:
            report = json.load(f)
        assert report['eod'] == pytest.approx(0.5)
        assert 'config_hash' in report['meta']

    def test_audit_errors(self, tmp_path):
        log = tmp_path / 'log.csv'
        log.write_text('id,y_true,y_pred,score,z\na,1,1,,1\nb,1,x,,0\n')
        assert main(['audit', str(log)]) == 2
        log.write_text('id,y_true,y_pred,score,z\na,1,1,,1\nb,0,1,,1\n')
        assert main(['audit', str(log)]) == 2


class TestPipeline:

    def test_three_condition_table(self, tmp_path, experiment, capsys):
        run_dirs = []
        for condition in CONDITIONS:
            run_dir = str(tmp_path / 'runs' / condition)
            assert main(['--config', experiment, 'train', '--condition', condition, '--run-dir', run_dir]) == 0
            run_dirs.append(run_dir)
        capsys.readouterr()

        out = str(tmp_path / 'table')
        assert main(['report', *run_dirs, '--out', out]) == 0
        text = capsys.readouterr().out
        assert text.splitlines()[0].split() == ['run', 'condition', 'ACC↑', 'SPD↓', 'DEO↓']
        assert '*' in text
        with open(os.path.join(out, 'table.csv')) as f:
            rows = list(csv.DictReader(f))
        assert [row['condition'] for row in rows] == [f'{c} +L_fair' for c in CONDITIONS]
        for column in ('ACC↑', 'SPD↓', 'DEO↓'):
            values = [float(row[column]) for row in rows]
            assert all(0.0 <= v <= 1.0 for v in values)
            assert all(len(row[column].split('.')[1]) == 4 for row in rows)
        flagged = [row['best'].split(';') for row in rows]
        assert any('ACC' in names for names in flagged)
        for row, run_dir in zip(rows, run_dirs):
            with open(os.path.join(run_dir, 'config.json')) as f:
                stamp = json.load(f)
            assert row['config_hash'] == stamp['config_hash']
            assert row['seed'] == '11'

    def test_single_run_has_no_flags(self, tmp_path, experiment, capsys):
        run_dir = str(tmp_path / 'run')
        assert main(['--config', experiment, 'train', '--run-dir', run_dir]) == 0
        capsys.readouterr()
        assert main(['report', run_dir, '--out', str(tmp_path)]) == 0
        assert '*' not in capsys.readouterr().out

    def test_incompatible_runs(self, tmp_path, experiment):
        run_dir = str(tmp_path / 'run')
        assert main(['--config', experiment, 'train', '--run-dir', run_dir]) == 0
        rng = np.random.default_rng(0)
        lines = ['id,y_true,y_pred,score,z']
        for i in range(40):
            lines.append(f'm{i},{i % 3},{rng.integers(0, 3)},,{i % 2}')
        log = tmp_path / 'multi.csv'
        log.write_text('\n'.join(lines) + '\n')
        assert main(['audit', str(log), '--out', str(tmp_path / 'multi')]) == 0
        assert main(['report', run_dir, str(tmp_path / 'multi')]) == 2
