import json

import pandas as pd
import pytest

from app.main import EXIT_CONFIG, EXIT_FAILED, EXIT_NUMERICAL, EXIT_OK, cmd_sweep, main
from app.models import CrossingReport, HierarchyVerdict
from conftest import CONFIG_DIR


def write_config(tmp_path, config_name, **update):
    data = json.loads((CONFIG_DIR / f'{config_name}.json').read_text())
    data.update(update)
    path = tmp_path / f'{config_name}.json'
    path.write_text(json.dumps(data))
    return path


def test_sweep_writes_outputs(tmp_path):
    out = tmp_path / 'out'
    assert main(['sweep', str(CONFIG_DIR / 'fig1_ad_nm.json'), '--out', str(out)]) == EXIT_OK

    frame = pd.read_csv(out / 'trajectory.csv')
    assert list(frame.columns) == ['t', 'fidelity', 'n_value', 'bell', 's2', 's3', 'concurrence', 'tau_qsl']
    assert len(frame) == 2000

    verdict = HierarchyVerdict.model_validate_json((out / 'verdict.json').read_text())
    assert verdict.decay_order_ok is True
    assert verdict.revival_order_ok is True
    CrossingReport.model_validate_json((out / 'crossings.json').read_text())


def test_dephasing_sweep_reports_no_revivals(tmp_path):
    out = tmp_path / 'pd'
    assert cmd_sweep(CONFIG_DIR / 'fig4_pd.json', out_dir=str(out)) == EXIT_OK
    crossings = json.loads((out / 'crossings.json').read_text())
    directions = [e['direction'] for m in crossings['measures'] for e in m['events']]
    assert 'revival' not in directions


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv('QCORR_OUT', str(tmp_path / 'root'))
    path = write_config(tmp_path, 'fig2_ad_m', n_points=20, name='small')
    assert main(['sweep', str(path)]) == EXIT_OK
    assert (tmp_path / 'root' / 'small' / 'trajectory.csv').exists()


def test_csv_is_deterministic(tmp_path):
    path = write_config(tmp_path, 'fig8_rtn_nm', n_points=200)
    assert cmd_sweep(path, out_dir=str(tmp_path / 'a')) == EXIT_OK
    assert cmd_sweep(path, out_dir=str(tmp_path / 'b')) == EXIT_OK
    first = (tmp_path / 'a' / 'trajectory.csv').read_bytes()
    assert first == (tmp_path / 'b' / 'trajectory.csv').read_bytes()
    assert b'\r\n' not in first


def test_static_sweep_leaves_qsl_column_empty(tmp_path):
    path = write_config(tmp_path, 'werner_static', n_points=50)
    assert cmd_sweep(path, out_dir=str(tmp_path / 'w')) == EXIT_OK
    frame = pd.read_csv(tmp_path / 'w' / 'trajectory.csv')
    assert frame['tau_qsl'].isna().all()
    assert frame['t'].iloc[-1] == 1.0


@pytest.mark.parametrize('update', [
    {'n_points': 1},
    {'t_max': -1.0},
    {'colour': 'blue'},
    {'steering_eigen_mode': 'trace'},
    {'time_axis': 'Gamma_1'},
    {'family': {'kind': 'rtn', 'regime': 'non_markovian', 'params': {'gamma': 1.0, 'a': 0.1}}},
    {'initial_state': {'kind': 'pure', 'alpha': 1.0, 'beta': 1.0}},
])
def test_invalid_configs_exit_2(tmp_path, update):
    path = write_config(tmp_path, 'fig1_ad_nm', **update)
    assert main(['sweep', str(path), '--out', str(tmp_path / 'x')]) == EXIT_CONFIG


def test_missing_and_malformed_files_exit_2(tmp_path):
    assert main(['sweep', str(tmp_path / 'nope.json')]) == EXIT_CONFIG
    broken = tmp_path / 'broken.json'
    broken.write_text('{"comment": ')
    assert main(['sweep', str(broken)]) == EXIT_CONFIG


def test_complex_amplitudes_as_pairs(tmp_path):
    s = 0.7071067811865476
    path = write_config(tmp_path, 'fig2_ad_m', n_points=5,
                        initial_state={'kind': 'pure', 'alpha': [s, 0.0], 'beta': [0.0, s]})
    assert cmd_sweep(path, out_dir=str(tmp_path / 'c')) == EXIT_OK


def test_literal_dephasing_sweep_exits_3(tmp_path):
    path = write_config(tmp_path, 'fig4_pd_m', n_points=20, literal_pd_kraus=True)
    assert main(['sweep', str(path), '--out', str(tmp_path / 'l')]) == EXIT_NUMERICAL


def test_table1_reproduces_every_row(tmp_path, capsys):
    assert main(['table1', '--out', str(tmp_path / 'table')]) == EXIT_OK
    printed = capsys.readouterr().out
    assert '12 of 12 rows reproduced' in printed
    assert (tmp_path / 'table' / 'fig14_werner_rtn_nm' / 'verdict.json').exists()


def test_validate_passes_on_shipped_configs(capsys):
    assert main(['validate']) == EXIT_OK
    printed = capsys.readouterr().out
    assert 'checks passed' in printed
    for name in ('concurrence against brute force', 'local unitary invariance', 'derivatives rtn/non_markovian'):
        assert name in printed
    assert '100 random states at 10 times' in printed


def test_validate_catches_literal_dephasing(capsys):
    assert main(['validate', '--literal-pd-kraus', '--n-points', '200']) == EXIT_FAILED
    assert 'completeness phase_damping/markovian' in capsys.readouterr().out


def test_validate_rejects_bad_grid():
    assert main(['validate', '--n-points', '1']) == EXIT_CONFIG
