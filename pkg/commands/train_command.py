import argparse
import logging
from pathlib import Path

from commands.common import add_common_flags, load_config, resolve_data, split_manifest, with_validation
from services.checkpoint_service import save_checkpoint
from services.run_repository import RunDirectory
from services.training_service import fit

logger = logging.getLogger(__name__)


def run_train(args: argparse.Namespace) -> int:
    config = load_config(args)
    ds, split, dataset_path = resolve_data(args, config)
    split = with_validation(split, ds, config)
    train_cfg = config.train_config()

    with RunDirectory(Path(args.out)) as run_dir:
        run_dir.save_config(config.resolved())
        run_dir.save_split(split_manifest(split, dataset_path))
        model, history = fit(ds, split, config.encoder_config(ds.input_dim), train_cfg, repository=run_dir)
        save_checkpoint(run_dir.checkpoint_path, model)

    if history.snapshots:
        epoch, report = history.snapshots[-1]
        print(f"epoch={epoch} auroc={report.auroc:.6f} oscr={report.oscr:.6f} closed_acc={report.closed_acc:.6f}")
    print(f"checkpoint {run_dir.checkpoint_path}")
    return 0


def setup_train_command(subparsers) -> None:
    parser = subparsers.add_parser(
        'train',
        help='Train a model and write the run directory',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_common_flags(parser, dataset=True, split=True)
    parser.set_defaults(handler=run_train)
