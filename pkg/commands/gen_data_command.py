import argparse
import logging
from pathlib import Path

from commands.common import add_common_flags, load_config
from data.ingestion import write_vector_csv
from data.synthetic import generate_synthetic
from services.run_repository import RunDirectory

logger = logging.getLogger(__name__)


def run_gen_data(args: argparse.Namespace) -> int:
    config = load_config(args)
    ds = generate_synthetic(config.synthetic_config())
    out = Path(args.out)
    RunDirectory(out).save_config(config.resolved())
    path = write_vector_csv(out / f"{args.name}.csv", ds)
    print(f"{path} {len(ds)} samples, {len(ds.class_ids)} classes, {ds.input_dim} features")
    return 0


def setup_gen_data_command(subparsers) -> None:
    parser = subparsers.add_parser(
        'gen-data',
        help='Generate the synthetic open-set benchmark as a vector CSV',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_common_flags(parser)
    parser.add_argument('--name', default='synthetic', help='dataset file stem')
    parser.set_defaults(handler=run_gen_data)
