import argparse
import logging
from pathlib import Path
from typing import Optional, Tuple

from data.ingestion import load_dataset
from data.labeled_dataset import LabeledDataset
from data.splits import OpenSetSplit, hold_out_validation, make_split
from data.synthetic import generate_synthetic
from services.config_manager import ConfigManager
from services.run_repository import CONFIG_FILE, SPLIT_FILE, RunDirectory
from utils.errors import UsageError
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)

DEFAULT_OUT = 'out'


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message: str):
        raise UsageError(message)


def add_common_flags(parser: argparse.ArgumentParser, dataset: bool = False, split: bool = False,
                     checkpoint: bool = False) -> None:
    parser.add_argument('--seed', type=int, default=None,
                        help='seed for every random choice (default: config value, else 0)')
    parser.add_argument('--out', default=DEFAULT_OUT, help=f'output directory (default: {DEFAULT_OUT})')
    parser.add_argument('--config', default=None,
                        help='experiment JSON with synthetic/model/split/train sections (default: built-in)')
    parser.add_argument('--log-level', default=None,
                        help='DEBUG, INFO, WARNING or ERROR (default: $ORTHOPROTO_LOG_LEVEL, else INFO)')
    if dataset:
        parser.add_argument('--dataset', default=None,
                            help='vector or signal CSV (default: synthetic data generated from the config)')
    if split:
        parser.add_argument('--split', default=None,
                            help='split manifest JSON (default: drawn from the split config section)')
    if checkpoint:
        parser.add_argument('--checkpoint', required=True, help='model.ckpt written by train')


def load_config(args: argparse.Namespace, fallback_dir: Optional[Path] = None) -> ConfigManager:
    """--config, else the run config found next to a checkpoint, else defaults; --seed overrides"""
    path = args.config
    if path is None and fallback_dir is not None and (fallback_dir / CONFIG_FILE).exists():
        path = fallback_dir / CONFIG_FILE
    return ConfigManager(path, seed=args.seed)


def resolve_dataset(path: Optional[str], config: ConfigManager) -> LabeledDataset:
    if path:
        return load_dataset(path)
    return generate_synthetic(config.synthetic_config())


def draw_split(ds: LabeledDataset, config: ConfigManager) -> OpenSetSplit:
    split_cfg = config.split_config()
    candidates = ds.provenance.get('known_style_ids') if split_cfg.known_style_only else None
    return make_split(ds, split_cfg.n_known, split_cfg.test_fraction, config.seed,
                      include_background_in_test=split_cfg.include_background_in_test,
                      known_candidates=candidates)


def read_split_manifest(path) -> Tuple[OpenSetSplit, Optional[str]]:
    """Split plus the dataset path recorded next to it, if any"""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"split manifest not found: {path}")
    payload = ReportWriter.read_json(path)
    return OpenSetSplit.from_dict(payload), payload.get('dataset')


def split_manifest(split: OpenSetSplit, dataset: Optional[str]) -> dict:
    return {**split.to_dict(), 'dataset': dataset}


def resolve_data(args: argparse.Namespace, config: ConfigManager,
                 fallback_dir: Optional[Path] = None) -> Tuple[LabeledDataset, OpenSetSplit, Optional[str]]:
    """
    Dataset and split for a command.

    The split comes from --split, else <fallback_dir>/split.json, else is drawn
    from the config. The dataset comes from --dataset, else the path recorded in
    the manifest, else is regenerated from the synthetic config.
    """
    split_path = getattr(args, 'split', None)
    if split_path is None and fallback_dir is not None and (fallback_dir / SPLIT_FILE).exists():
        split_path = fallback_dir / SPLIT_FILE

    dataset_path = getattr(args, 'dataset', None)
    split = None
    if split_path is not None:
        split, recorded = read_split_manifest(split_path)
        dataset_path = dataset_path or recorded

    ds = resolve_dataset(dataset_path, config)
    if split is None:
        split = draw_split(ds, config)
    else:
        split.validate(ds)
    return ds, split, dataset_path


def with_validation(split: OpenSetSplit, ds: LabeledDataset, config: ConfigManager) -> OpenSetSplit:
    fraction = config.train_config().validation_fraction
    if fraction > 0 and split.validation_known is None:
        return hold_out_validation(split, ds, fraction, config.seed)
    return split


def echo_run(out, config: ConfigManager, split: Optional[OpenSetSplit] = None,
             dataset_path: Optional[str] = None) -> RunDirectory:
    """Write the resolved config (and the split, when there is one) into the output directory"""
    run_dir = RunDirectory(Path(out))
    run_dir.save_config(config.resolved())
    if split is not None:
        run_dir.save_split(split_manifest(split, dataset_path))
    return run_dir
