"""
End-to-end tests through the command-line entry point
"""

import configparser

import pandas as pd
import pytest

from dpgan.checkpoint import load_checkpoint, read_sidecar
from dpgan.cli import main
from dpgan.data import load_csv, load_schema
from dpgan.run_config import load_run_config
from dpgan.services.accounting_service import run_accounting
from dpgan.utility import read_report

SMALL_RUN = """
[run]
seed = {seed}
run_id = cli

[data]
train_csv = {csv}
schema = {schema}

[architecture]
noise_dim = 4
hidden_sizes = 8
critic_hidden_sizes = {critic}

[dp]
clip_bound = 1.0
noise_scale = {sigma}
lot_size = {lot}
learning_rate = {lr}

[training]
epsilon_target = 100.0
n_disc = 2
max_generator_iterations = 2
metrics_every = 1
generator_batch = 8
private = {private}
"""


def _write_config(path, csv, schema, seed=0, critic='8', sigma=1.0, lot=10, lr=0.05, private='true'):
    path.write_text(
        SMALL_RUN.format(seed=seed, csv=csv, schema=schema, critic=critic, sigma=sigma, lot=lot, lr=lr,
                         private=private),
        encoding='utf-8',
    )
    return path


@pytest.fixture
def gaussians(tmp_path):
    csv = tmp_path / 'data' / 'gaussians.csv'
    assert main(['synth-data', '--kind', 'gaussians', '--n', '60', '--seed', '0', '--out', str(csv)]) == 0
    return csv, csv.with_suffix('.schema')


def test_accounting_prints_epsilon(capsys):
    assert main(['accounting', '--q', '0.01', '--sigma', '4', '--steps', '1000', '--delta', '1e-5']) == 0
    out = capsys.readouterr().out
    expected = run_accounting(0.01, 4.0, 1000, 1e-5)
    assert f"epsilon: {expected.epsilon!r}" in out
    assert f"best lambda: {expected.best_lambda}" in out


def test_usage_and_config_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(['accounting', '--q', '0.01']) == 1
    assert main(['accounting', '--q', '2', '--sigma', '1', '--steps', '5']) == 1
    assert main(['synth-data', '--kind', 'faces', '--n', '5', '--out', 'unused.csv']) == 1
    assert 'required' in capsys.readouterr().err


def test_data_errors_exit_2(tmp_path):
    assert main(['generate', '--checkpoint', str(tmp_path / 'absent.ckpt'), '--count', '3',
                 '--out', str(tmp_path / 'x.csv')]) == 2


def test_train_generate_evaluate_attack(gaussians, tmp_path, capsys):
    csv, schema = gaussians
    config = _write_config(tmp_path / 'run.ini', csv, schema, seed=3)
    run_dir = tmp_path / 'run'

    assert main(['train', '--config', str(config), '--out', str(run_dir)]) == 0
    for name in ('resolved_config.ini', 'model.ckpt', 'model.ckpt.meta.json', 'metrics.csv', 'timings.csv'):
        assert (run_dir / name).is_file(), name
    meta = read_sidecar(run_dir / 'model.ckpt')
    assert meta['seed'] == 3
    assert meta['generator_iterations'] == 2
    assert 0.0 < meta['epsilon'] <= 100.0
    assert "epsilon:" in capsys.readouterr().out

    first, second = tmp_path / 'g1.csv', tmp_path / 'g2.csv'
    for out in (first, second):
        assert main(['generate', '--checkpoint', str(run_dir / 'model.ckpt'), '--count', '25',
                     '--seed', '8', '--out', str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.with_suffix('.schema').read_text() == schema.read_text()
    assert len(pd.read_csv(first)) == 25

    assert main(['evaluate', '--checkpoint', str(run_dir / 'model.ckpt'), '--data', str(csv),
                 '--schema', str(schema), '--mode', 'distance', '--out', str(tmp_path / 'eval')]) == 0
    report = read_report(tmp_path / 'eval' / 'report.csv')
    assert {'sliced_w1', 'w1/x', 'w1/y', 'tv/component', 'epsilon'} <= set(report)
    assert report['epsilon'] == pytest.approx(meta['epsilon'])

    others = tmp_path / 'data' / 'others.csv'
    assert main(['synth-data', '--kind', 'gaussians', '--n', '60', '--seed', '1', '--out', str(others)]) == 0
    assert main(['attack', '--checkpoint', str(run_dir / 'model.ckpt'), '--members', str(csv),
                 '--nonmembers', str(others), '--out', str(tmp_path / 'attack')]) == 0
    attack = read_report(tmp_path / 'attack' / 'attack_report.csv')
    assert 0.0 <= attack['auc'] <= 1.0
    assert (tmp_path / 'attack' / 'roc.csv').is_file()


def test_training_is_reproducible_from_config(gaussians, tmp_path):
    csv, schema = gaussians
    config = _write_config(tmp_path / 'run.ini', csv, schema, seed=5)
    for name in ('a', 'b'):
        assert main(['train', '--config', str(config), '--out', str(tmp_path / name)]) == 0
    assert (tmp_path / 'a' / 'metrics.csv').read_bytes() == (tmp_path / 'b' / 'metrics.csv').read_bytes()
    assert (tmp_path / 'a' / 'model.ckpt').read_bytes() == (tmp_path / 'b' / 'model.ckpt').read_bytes()


def test_stripped_release_cannot_be_attacked(gaussians, tmp_path):
    csv, schema = gaussians
    config = _write_config(tmp_path / 'run.ini', csv, schema)
    assert main(['train', '--config', str(config), '--out', str(tmp_path / 'run'), '--strip-discriminator']) == 0
    assert not load_checkpoint(tmp_path / 'run' / 'model.ckpt').has_critic
    assert main(['attack', '--checkpoint', str(tmp_path / 'run' / 'model.ckpt'), '--members', str(csv),
                 '--nonmembers', str(csv), '--out', str(tmp_path / 'attack')]) == 1


def test_divergence_exits_3_and_keeps_last_good(gaussians, tmp_path):
    csv, schema = gaussians
    config = _write_config(tmp_path / 'run.ini', csv, schema, critic='', sigma=0.0, lot=60, lr=1e250,
                           private='false')
    assert main(['train', '--config', str(config), '--out', str(tmp_path / 'run')]) == 3
    assert (tmp_path / 'run' / 'last_good.ckpt').is_file()
    assert not (tmp_path / 'run' / 'model.ckpt').exists()


def test_checkpoint_commands_record_resolved_config(gaussians, tmp_path):
    csv, schema = gaussians
    config = _write_config(tmp_path / 'run.ini', csv, schema, seed=3)
    run_dir = tmp_path / 'run'
    checkpoint = str(run_dir / 'model.ckpt')
    assert main(['train', '--config', str(config), '--out', str(run_dir)]) == 0
    assert main(['generate', '--checkpoint', checkpoint, '--count', '5', '--seed', '2',
                 '--out', str(tmp_path / 'gen' / 'rows.csv')]) == 0
    assert main(['evaluate', '--checkpoint', checkpoint, '--data', str(csv), '--schema', str(schema),
                 '--mode', 'distance', '--out', str(tmp_path / 'eval')]) == 0
    assert main(['attack', '--checkpoint', checkpoint, '--members', str(csv), '--nonmembers', str(csv),
                 '--out', str(tmp_path / 'attack')]) == 0

    training = load_run_config(run_dir / 'resolved_config.ini')
    for command, directory in (('generate', 'gen'), ('evaluate', 'eval'), ('attack', 'attack')):
        path = tmp_path / directory / 'resolved_config.ini'
        parser = configparser.ConfigParser(interpolation=None)
        parser.read(path, encoding='utf-8')
        assert parser['command']['name'] == command
        assert parser['command']['checkpoint'] == str((run_dir / 'model.ckpt').resolve())
        # the [command] section is skipped, so the training run can be repeated from here
        assert load_run_config(path).values == training.values
    parser = configparser.ConfigParser(interpolation=None)
    parser.read(tmp_path / 'gen' / 'resolved_config.ini', encoding='utf-8')
    assert (parser['command']['count'], parser['command']['seed']) == ('5', '2')


def test_evaluate_in_run_directory_keeps_training_config(gaussians, tmp_path):
    csv, schema = gaussians
    config = _write_config(tmp_path / 'run.ini', csv, schema)
    run_dir = tmp_path / 'run'
    assert main(['train', '--config', str(config), '--out', str(run_dir)]) == 0
    before = (run_dir / 'resolved_config.ini').read_bytes()

    assert main(['evaluate', '--checkpoint', str(run_dir / 'model.ckpt'), '--data', str(csv),
                 '--schema', str(schema), '--mode', 'distance', '--out', str(run_dir)]) == 0
    assert (run_dir / 'resolved_config.ini').read_bytes() == before
    assert 'name = evaluate' in (run_dir / 'evaluate_resolved_config.ini').read_text(encoding='utf-8')


def test_generate_zero_rows_writes_header_only(gaussians, tmp_path):
    csv, schema = gaussians
    config = _write_config(tmp_path / 'run.ini', csv, schema)
    assert main(['train', '--config', str(config), '--out', str(tmp_path / 'run')]) == 0
    out = tmp_path / 'empty.csv'
    assert main(['generate', '--checkpoint', str(tmp_path / 'run' / 'model.ckpt'), '--count', '0',
                 '--out', str(out)]) == 0

    assert out.read_text(encoding='utf-8').splitlines() == ['x,y,component']
    table = load_csv(out, load_schema(out.with_suffix('.schema')))
    assert len(table) == 0


def test_synth_timeseries_defaults_to_96_steps(tmp_path):
    out = tmp_path / 'series.csv'
    assert main(['synth-data', '--kind', 'timeseries', '--n', '3', '--seed', '0', '--out', str(out)]) == 0
    schema = load_schema(out.with_suffix('.schema'))
    assert schema.column('consumption').length == 96
    table = load_csv(out, schema)
    assert table.shape == (3, 96 + 1)
    assert list(table.columns[:2]) == ['consumption_0', 'consumption_1']
    parser = configparser.ConfigParser(interpolation=None)
    parser.read(tmp_path / 'resolved_config.ini', encoding='utf-8')
    assert dict(parser['command']) == {
        'name': 'synth-data', 'kind': 'timeseries', 'n': '3', 'seed': '0', 'out': str(out.resolve()),
        'length': '96', 'n_regions': '4',
    }
