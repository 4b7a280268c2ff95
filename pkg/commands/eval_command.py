import argparse
import logging
from pathlib import Path

from commands.common import add_common_flags, echo_run, load_config, resolve_data
from scoring.baseline_scorer import SCORERS
from services.checkpoint_service import load_checkpoint
from services.evaluation_service import evaluate_model, export_evaluation
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)


def run_eval(args: argparse.Namespace) -> int:
    run_dir = Path(args.checkpoint).parent
    config = load_config(args, fallback_dir=run_dir)
    ds, split, dataset_path = resolve_data(args, config, fallback_dir=run_dir)
    model = load_checkpoint(args.checkpoint)
    echo_run(args.out, config, split, dataset_path)

    result = evaluate_model(model, ds, split, scorer=args.scorer, diagnostics=True)
    export_evaluation(args.out, result)
    summary = {key: value for key, value in result.report.to_dict().items() if key != 'ccr_fpr_curve'}
    if result.histogram is not None:
        summary['activation_overlap'] = result.histogram.overlap
    if result.confusion is not None:
        summary['known_diagonal'] = result.confusion.known_diagonal
        summary['unknown_diagonal'] = result.confusion.unknown_diagonal
    print(ReportWriter.dumps(summary), end='')
    return 0


def setup_eval_command(subparsers) -> None:
    parser = subparsers.add_parser(
        'eval',
        help='Evaluate a checkpoint on the test split (metrics JSON plus plot-ready CSV)',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_common_flags(parser, dataset=True, split=True, checkpoint=True)
    parser.add_argument('--scorer', default='confidence', choices=sorted(SCORERS),
                        help='known-confidence rule')
    parser.set_defaults(handler=run_eval)
