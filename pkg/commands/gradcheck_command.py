import argparse
import logging
from pathlib import Path

from commands.common import add_common_flags, echo_run, load_config
from services.gradcheck_service import DEFAULT_POINTS, TERMS, run_gradcheck
from utils.errors import NumericError
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)


def run_gradcheck_command(args: argparse.Namespace) -> int:
    config = load_config(args)
    echo_run(args.out, config)
    report = run_gradcheck(config.seed, points=args.points)
    for term in TERMS:
        print(f"{term:<8} {report.errors[term]:.3e}")
    ReportWriter.write_json(Path(args.out) / 'gradcheck.json', report.to_dict())
    if not report.passed:
        worst = max(report.errors, key=report.errors.get)
        raise NumericError(f"gradient check failed: {worst} error {report.errors[worst]:.3e} "
                           f">= {report.tolerance:.0e}", term=worst)
    return 0


def setup_gradcheck_command(subparsers) -> None:
    parser = subparsers.add_parser(
        'gradcheck',
        help='Compare analytic and finite-difference gradients of every loss term',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_common_flags(parser)
    parser.add_argument('--points', type=int, default=DEFAULT_POINTS, help='random check points')
    parser.set_defaults(handler=run_gradcheck_command)
