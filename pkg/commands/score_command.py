import argparse
import logging
from pathlib import Path

from commands.common import add_common_flags, echo_run, load_config, resolve_data
from scoring.threshold import calibrate_threshold
from services.checkpoint_service import load_checkpoint
from services.evaluation_service import build_records, evaluate_model, score_rows
from utils.errors import UsageError
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)

DEFAULT_TARGET_FPR = 0.05


def run_score(args: argparse.Namespace) -> int:
    run_dir = Path(args.checkpoint).parent
    config = load_config(args, fallback_dir=run_dir)
    ds, split, dataset_path = resolve_data(args, config, fallback_dir=run_dir)
    model = load_checkpoint(args.checkpoint)
    echo_run(args.out, config, split, dataset_path)

    threshold = args.threshold
    if threshold is None:
        if not split.validation_known:
            raise UsageError("no known-validation slice in the split; pass --threshold")
        validation = build_records(model, ds, split, split.validation_known + split.test_unknown)
        known_scores = [r.score for r in validation.records if r.is_known]
        threshold = calibrate_threshold(known_scores, args.target_fpr)
        logger.info(f"[Score] Threshold {threshold:.6f} calibrated on {len(known_scores)} validation samples")

    result = evaluate_model(model, ds, split)
    rows = score_rows(result, threshold=threshold)
    path = ReportWriter.write_csv(Path(args.out) / 'decisions.csv', rows)
    accepted = sum(row['accepted'] for row in rows)
    print(f"threshold={threshold!r} accepted={accepted}/{len(rows)} {path}")
    return 0


def setup_score_command(subparsers) -> None:
    parser = subparsers.add_parser(
        'score',
        help='Write per-sample accept/reject decisions for the test split',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_common_flags(parser, dataset=True, split=True, checkpoint=True)
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--threshold', type=float, default=None, help='accept iff C_max > threshold')
    group.add_argument('--target-fpr', type=float, default=DEFAULT_TARGET_FPR,
                       help='fraction of known-validation samples allowed below the calibrated threshold')
    parser.set_defaults(handler=run_score)
