import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from data.labeled_dataset import LabeledDataset
from data.splits import OpenSetSplit, hold_out_validation, make_split
from data.synthetic import generate_synthetic
from losses.loss_types import AblationFlags
from services.config_manager import ConfigManager
from services.evaluation_service import evaluate_model
from services.training_service import fit
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuiteRow:
    name: str
    flags: AblationFlags
    scorer: str = 'confidence'


_OFF = AblationFlags(multi_projection=False, use_l_f=False, use_l_fb=False, use_orth=False, use_penalty=False)

SUITES: Dict[str, Tuple[SuiteRow, ...]] = {
    'table3': (
        SuiteRow('PL', _OFF),
        SuiteRow('L_F', replace(_OFF, use_l_f=True)),
        SuiteRow('FAEM', replace(_OFF, use_l_f=True, use_l_fb=True)),
        SuiteRow('MP+FAEM', replace(_OFF, multi_projection=True, use_l_f=True, use_l_fb=True)),
        SuiteRow('MP+FAEM+L_orth', AblationFlags(use_penalty=False)),
        SuiteRow('FAEM+OPL', AblationFlags()),
    ),
    'baselines': (
        SuiteRow('softmax', _OFF, scorer='softmax_confidence'),
        SuiteRow('PL', _OFF, scorer='pl_similarity'),
        SuiteRow('FAEM+OPL', AblationFlags()),
    ),
}

METRICS = ('auroc', 'oscr', 'closed_acc', 'overlap', 'activation_gap', 'diagonal_gap', 'orth_ratio')


@dataclass
class CellResult:
    row: str
    seed: int
    values: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class AblationTable:
    suite: str
    seeds: List[int]
    cells: List[CellResult]
    rows: Sequence[SuiteRow]

    def summary_rows(self) -> List[dict]:
        """One row per configuration: flags, then mean and population std per metric"""
        out = []
        for row in self.rows:
            cells = [c for c in self.cells if c.row == row.name]
            ok = [c for c in cells if c.ok]
            entry = {
                'row': row.name,
                'scorer': row.scorer,
                'MP': int(row.flags.multi_projection),
                'L_F': int(row.flags.use_l_f),
                'L_Fb': int(row.flags.use_l_fb),
                'L_orth': int(row.flags.use_orth),
                'L_Pb': int(row.flags.use_penalty),
                'n_ok': len(ok),
                'n_failed': len(cells) - len(ok),
            }
            for metric in METRICS:
                values = np.array([c.values[metric] for c in ok if metric in c.values], dtype=np.float64)
                entry[f"{metric}_mean"] = float(values.mean()) if values.size else float('nan')
                entry[f"{metric}_std"] = float(values.std(ddof=0)) if values.size else float('nan')
            out.append(entry)
        return out

    def cell_rows(self) -> List[dict]:
        rows = []
        for cell in self.cells:
            row = {'row': cell.row, 'seed': cell.seed, 'status': 'ok' if cell.ok else 'failed',
                   'error': cell.error or ''}
            row.update({metric: cell.values.get(metric, float('nan')) for metric in METRICS})
            rows.append(row)
        return rows


def resolve_suite(suite: str) -> Tuple[SuiteRow, ...]:
    """Rows of a named suite; unknown names raise ConfigError"""
    rows = SUITES.get(suite)
    if rows is None:
        raise ConfigError(f"Unknown suite: {suite}. Supported suites: {', '.join(SUITES)}")
    return rows


def parse_seeds(value: str) -> List[int]:
    """'5' means seeds 0..4; '3,7,11' lists them explicitly"""
    try:
        if ',' in value:
            seeds = [int(s) for s in value.split(',') if s.strip()]
        else:
            seeds = list(range(int(value)))
    except ValueError:
        raise ConfigError(f"--seeds expects a count or a comma list, got '{value}'")
    if not seeds:
        raise ConfigError("at least one seed is required")
    return seeds


def benchmark_data(config: ConfigManager, seed: int,
                   ds: Optional[LabeledDataset] = None) -> Tuple[LabeledDataset, OpenSetSplit]:
    """Dataset (synthetic per seed unless given) and its split for one randomized trial"""
    seeded = config.with_seed(seed)
    if ds is None:
        ds = generate_synthetic(seeded.synthetic_config())
    split_cfg = seeded.split_config()
    candidates = ds.provenance.get('known_style_ids') if split_cfg.known_style_only else None
    split = make_split(ds, split_cfg.n_known, split_cfg.test_fraction, seed,
                       include_background_in_test=split_cfg.include_background_in_test,
                       known_candidates=candidates)
    train_cfg = seeded.train_config()
    if train_cfg.validation_fraction > 0:
        split = hold_out_validation(split, ds, train_cfg.validation_fraction, seed)
    return ds, split


def run_cell(config: ConfigManager, row: SuiteRow, seed: int, ds: LabeledDataset,
             split: OpenSetSplit) -> CellResult:
    """Train and evaluate one (row, seed) cell; failures propagate to run_ablation"""
    train_cfg = replace(config.train_config(), flags=row.flags, seed=seed)
    model, history = fit(ds, split, config.encoder_config(ds.input_dim), train_cfg)
    result = evaluate_model(model, ds, split, scorer=row.scorer, diagnostics=True)
    values = {
        'auroc': result.report.auroc,
        'oscr': result.report.oscr,
        'closed_acc': result.report.closed_acc,
        'overlap': result.histogram.overlap,
        'activation_gap': result.mean_activation(known=True) - result.mean_activation(known=False),
    }
    if result.confusion is not None:
        values['diagonal_gap'] = result.confusion.known_diagonal - result.confusion.unknown_diagonal
    if model.dual:
        values['orth_ratio'] = history.orth_ratio()
    return CellResult(row=row.name, seed=seed, values=values)


def run_ablation(config: ConfigManager, suite: str, seeds: Sequence[int],
                 ds: Optional[LabeledDataset] = None,
                 on_cell: Optional[Callable[[CellResult], None]] = None) -> AblationTable:
    """
    Train every configuration of the suite once per seed.

    All rows share the dataset and split of a seed. A failing cell is recorded
    with its error and the suite continues.
    """
    rows = resolve_suite(suite)
    if not seeds:
        raise ConfigError("at least one seed is required")
    cells: List[CellResult] = []
    for seed in seeds:
        try:
            data_ds, split = benchmark_data(config, seed, ds)
        except Exception as e:
            logger.warning(f"[Ablation] seed={seed} has no usable data: {e}")
            data_ds, split, data_error = None, None, f"{type(e).__name__}: {e}"
        else:
            data_error = None
        for row in rows:
            if data_error is not None:
                cell = CellResult(row=row.name, seed=seed, error=data_error)
            else:
                try:
                    cell = run_cell(config, row, seed, data_ds, split)
                except Exception as e:
                    logger.warning(f"[Ablation] {row.name} seed={seed} failed: {e}")
                    cell = CellResult(row=row.name, seed=seed, error=f"{type(e).__name__}: {e}")
                else:
                    logger.info(f"[Ablation] {row.name} seed={seed} AUROC={cell.values['auroc']:.4f}")
            cells.append(cell)
            if on_cell is not None:
                on_cell(cell)
    return AblationTable(suite=suite, seeds=list(seeds), cells=cells, rows=rows)
