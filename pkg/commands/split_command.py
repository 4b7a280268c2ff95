import argparse
import logging
from pathlib import Path

from commands.common import add_common_flags, draw_split, load_config, resolve_dataset, split_manifest
from services.run_repository import RunDirectory

logger = logging.getLogger(__name__)


def run_split(args: argparse.Namespace) -> int:
    config = load_config(args)
    ds = resolve_dataset(args.dataset, config)
    split = draw_split(ds, config)
    run_dir = RunDirectory(Path(args.out))
    run_dir.save_config(config.resolved())
    run_dir.save_split(split_manifest(split, args.dataset))
    print(f"{run_dir.split_path} known={split.known_class_ids} background={split.background_class_id} "
          f"unknown={split.unknown_class_ids}")
    return 0


def setup_split_command(subparsers) -> None:
    parser = subparsers.add_parser(
        'split',
        help='Draw known/background/unknown classes and write the split manifest',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_common_flags(parser, dataset=True)
    parser.set_defaults(handler=run_split)
