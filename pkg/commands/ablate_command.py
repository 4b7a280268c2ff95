import argparse
import logging
from pathlib import Path

from commands.common import add_common_flags, load_config
from data.ingestion import load_dataset
from services.ablation_service import SUITES, parse_seeds, run_ablation
from services.run_repository import RunDirectory
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)


def run_ablate(args: argparse.Namespace) -> int:
    config = load_config(args)
    seeds = parse_seeds(args.seeds)
    ds = load_dataset(args.dataset) if args.dataset else None
    out = Path(args.out)
    RunDirectory(out).save_config(config.resolved())

    table = run_ablation(config, args.suite, seeds, ds=ds)
    summary = table.summary_rows()
    path = ReportWriter.write_csv(out / f"ablation_{args.suite}.csv", summary)
    ReportWriter.write_csv(out / f"ablation_{args.suite}_cells.csv", table.cell_rows())

    for row in summary:
        print(f"{row['row']:<16} AUROC {row['auroc_mean']:.4f}±{row['auroc_std']:.4f}  "
              f"OSCR {row['oscr_mean']:.4f}±{row['oscr_std']:.4f}  "
              f"ACC {row['closed_acc_mean']:.4f}±{row['closed_acc_std']:.4f}  failed={row['n_failed']}")
    print(path)
    return 0


def setup_ablate_command(subparsers) -> None:
    parser = subparsers.add_parser(
        'ablate',
        help='Train each configuration of a suite per seed and report mean±std metrics',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_common_flags(parser, dataset=True)
    parser.add_argument('--suite', default='table3', choices=sorted(SUITES), help='configuration suite')
    parser.add_argument('--seeds', default='5', help='seed count (0..n-1) or comma-separated seed list')
    parser.set_defaults(handler=run_ablate)
