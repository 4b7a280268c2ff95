import numpy as np
import pytest

import services.ablation_service as ablation_service
from services.ablation_service import METRICS, SUITES, CellResult, parse_seeds, resolve_suite, run_ablation
from services.config_manager import ConfigManager
from utils.errors import ConfigError


def fake_cell(config, row, seed, ds, split):
    return CellResult(row=row.name, seed=seed, values={metric: 0.5 + seed / 10 for metric in METRICS})


@pytest.fixture
def config(tiny_config_file):
    return ConfigManager(tiny_config_file)


def test_parse_seeds():
    assert parse_seeds('3') == [0, 1, 2]
    assert parse_seeds('4,9') == [4, 9]
    for bad in ('x', '0', ','):
        with pytest.raises(ConfigError):
            parse_seeds(bad)


def test_suites():
    names = [row.name for row in resolve_suite('table3')]
    assert names == ['PL', 'L_F', 'FAEM', 'MP+FAEM', 'MP+FAEM+L_orth', 'FAEM+OPL']
    full = SUITES['table3'][-1].flags
    assert full.multi_projection and full.use_orth and full.use_penalty
    assert not SUITES['table3'][-2].flags.use_penalty
    with pytest.raises(ConfigError):
        resolve_suite('table9')


def test_mean_and_population_std(monkeypatch, config):
    monkeypatch.setattr(ablation_service, 'run_cell', fake_cell)
    table = run_ablation(config, 'table3', [0, 1])
    summary = table.summary_rows()
    assert len(summary) == 6 and len(table.cells) == 12
    for row in summary:
        assert (row['n_ok'], row['n_failed']) == (2, 0)
        assert row['auroc_mean'] == pytest.approx(0.55)
        assert row['auroc_std'] == pytest.approx(0.05)
    assert [summary[0][flag] for flag in ('MP', 'L_F', 'L_Fb', 'L_orth', 'L_Pb')] == [0, 0, 0, 0, 0]


def test_failed_cell_does_not_stop_the_suite(monkeypatch, config):
    def flaky(config, row, seed, ds, split):
        if row.name == 'L_F' and seed == 1:
            raise FloatingPointError('diverged')
        return fake_cell(config, row, seed, ds, split)

    monkeypatch.setattr(ablation_service, 'run_cell', flaky)
    seen = []
    table = run_ablation(config, 'table3', [0, 1], on_cell=seen.append)
    assert len(seen) == 12
    row = next(r for r in table.summary_rows() if r['row'] == 'L_F')
    assert (row['n_ok'], row['n_failed']) == (1, 1)
    assert row['auroc_mean'] == pytest.approx(0.5)
    failed = [c for c in table.cell_rows() if c['status'] == 'failed']
    assert len(failed) == 1 and 'diverged' in failed[0]['error']
    assert np.isnan(failed[0]['auroc'])


def test_unusable_seed_marks_every_row(config):
    config.set_section('split', {'n_known': 5})
    table = run_ablation(config, 'baselines', [0])
    assert all(not cell.ok for cell in table.cells)
    assert all(np.isnan(row['auroc_mean']) for row in table.summary_rows())


def test_real_cells_share_data_per_seed(config):
    table = run_ablation(config, 'baselines', [0])
    assert all(cell.ok for cell in table.cells)
    by_row = {cell.row: cell for cell in table.cells}
    assert {'diagonal_gap', 'orth_ratio', 'activation_gap'} <= set(by_row['FAEM+OPL'].values)
    assert 'diagonal_gap' not in by_row['softmax'].values
    assert 'orth_ratio' not in by_row['softmax'].values


BENCHMARK_SEEDS = range(5)


@pytest.fixture(scope='module')
def benchmark_table():
    return run_ablation(ConfigManager(), 'table3', BENCHMARK_SEEDS)


@pytest.fixture(scope='module')
def benchmark_summary(benchmark_table):
    return {row['row']: row for row in benchmark_table.summary_rows()}


@pytest.mark.slow
def test_benchmark_runs_every_cell(benchmark_table, benchmark_summary):
    assert all(cell.ok for cell in benchmark_table.cells)
    assert benchmark_summary['FAEM+OPL']['closed_acc_mean'] > 0.8


@pytest.mark.slow
def test_full_method_beats_plain_prototypes(benchmark_summary):
    gap = benchmark_summary['FAEM+OPL']['auroc_mean'] - benchmark_summary['PL']['auroc_mean']
    assert gap >= 0.02


@pytest.mark.slow
def test_faem_separates_activations(benchmark_summary):
    faem, plain = benchmark_summary['FAEM'], benchmark_summary['PL']
    assert faem['activation_gap_mean'] > 0
    assert faem['overlap_mean'] < plain['overlap_mean']


@pytest.mark.slow
def test_branches_agree_more_on_known_samples(benchmark_summary):
    assert benchmark_summary['FAEM+OPL']['diagonal_gap_mean'] >= 0.15


@pytest.mark.slow
def test_orthogonality_pressure_on_every_run(benchmark_table):
    with_orth = {row.name for row in SUITES['table3'] if row.flags.multi_projection and row.flags.use_orth}
    ratios = [cell.values['orth_ratio'] for cell in benchmark_table.cells if cell.row in with_orth]
    assert len(ratios) == len(with_orth) * len(BENCHMARK_SEEDS)
    assert max(ratios) < 0.1
