import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from data.labeled_dataset import LabeledDataset
from data.splits import OpenSetSplit
from metrics.diagnostics import (
    ActivationHistogram,
    ProjectionConfusion,
    activation_histogram,
    projection_confusion,
)
from metrics.osr_metrics import EvalRecord, MetricReport, evaluate_records
from models.dual_branch_model import DualBranchModel
from scoring.baseline_scorer import get_scorer
from scoring.confidence_scorer import REJECT, ScoreTable, score_batch
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)

UNKNOWN_LABEL = -1


@dataclass
class EvaluationResult:
    report: MetricReport
    records: List[EvalRecord]
    table: ScoreTable
    sample_ids: np.ndarray
    true_labels: np.ndarray
    scorer: str = 'confidence'
    histogram: Optional[ActivationHistogram] = None
    confusion: Optional[ProjectionConfusion] = None

    def mean_activation(self, known: bool) -> float:
        """Mean branch-A ‖z‖₁ over the known or the unknown rows"""
        values = [r.activation for r in self.records if r.is_known == known]
        return float(np.mean(values)) if values else float('nan')


def evaluation_indices(split: OpenSetSplit, use_validation: bool = False) -> np.ndarray:
    """Known rows (test or validation slice) followed by unknown test rows"""
    known = split.validation_known if use_validation and split.validation_known else split.test_known
    return np.asarray(list(known) + list(split.test_unknown), dtype=np.int64)


def build_records(model: DualBranchModel, ds: LabeledDataset, split: OpenSetSplit,
                  indices: Sequence[int], scorer: str = 'confidence') -> EvaluationResult:
    """Score the given dataset rows; rows of known classes get labels in [0, N)"""
    indices = np.asarray(indices, dtype=np.int64)
    samples = ds.samples[indices]
    labels = ds.labels[indices]
    label_map = split.label_map
    is_known = np.array([int(c) in label_map for c in labels], dtype=bool)
    true_labels = np.array([label_map.get(int(c), UNKNOWN_LABEL) for c in labels], dtype=np.int64)

    table = score_batch(model, samples)
    rule = get_scorer(scorer)
    scores = table.c_max if rule.name == 'confidence' else rule.score(model, samples)
    predicted = table.k_star if rule.name == 'confidence' else rule.predict(model, samples)

    records = [
        EvalRecord(
            is_known=bool(is_known[i]),
            true_class=int(true_labels[i]),
            predicted_class=int(predicted[i]),
            score=float(scores[i]),
            activation=float(table.act_a[i]),
            sample_id=int(indices[i]),
        )
        for i in range(len(indices))
    ]
    return EvaluationResult(
        report=evaluate_records(records),
        records=records,
        table=table,
        sample_ids=indices,
        true_labels=true_labels,
        scorer=rule.name,
    )


def evaluate_model(model: DualBranchModel, ds: LabeledDataset, split: OpenSetSplit,
                   scorer: str = 'confidence', use_validation: bool = False,
                   diagnostics: bool = False) -> EvaluationResult:
    """Score the test (or validation) slice and compute the open-set metrics;
    diagnostics adds the activation histogram and, for two branches, projection confusion"""
    result = build_records(model, ds, split, evaluation_indices(split, use_validation), scorer)
    if diagnostics:
        result.histogram = activation_histogram(result.records)
        if model.dual:
            known_rows = ds.samples[split.test_known]
            unknown_rows = ds.samples[split.test_unknown]
            result.confusion = projection_confusion(model, known_rows, unknown_rows)
    logger.info(f"[Evaluation] {scorer}: AUROC={result.report.auroc:.4f} OSCR={result.report.oscr:.4f} "
                f"ACC={result.report.closed_acc:.4f}")
    return result


def score_rows(result: EvaluationResult, threshold: Optional[float] = None) -> List[dict]:
    """
    Per-sample score table for the scorer that produced the result.

    `score` and `predicted` come from that scorer; the per-class C_k columns
    are added only for the confidence scorer. With a threshold each row also
    carries the accept decision (accepted iff score > threshold).
    """
    rows = []
    with_confidence = result.scorer == 'confidence'
    n_classes = result.table.confidence.shape[1]
    for i, record in enumerate(result.records):
        row = {
            'sample_id': record.sample_id,
            'true_label': int(result.true_labels[i]),
            'is_known': int(record.is_known),
            'scorer': result.scorer,
            'score': record.score,
            'predicted': record.predicted_class,
        }
        if with_confidence:
            for k in range(n_classes):
                row[f"c_{k}"] = float(result.table.confidence[i, k])
        if threshold is not None:
            accepted = bool(record.score > threshold)
            row['accepted'] = int(accepted)
            row['decision'] = record.predicted_class if accepted else REJECT
        rows.append(row)
    return rows


def export_evaluation(out_dir: Union[str, Path], result: EvaluationResult) -> Path:
    """metrics.json plus plot-ready CSV files"""
    out_dir = Path(out_dir)
    ReportWriter.write_json(out_dir / 'metrics.json', result.report.to_dict())
    ReportWriter.write_csv(out_dir / 'scores.csv', score_rows(result))
    ReportWriter.write_csv(out_dir / 'ccr_fpr_curve.csv', ReportWriter.curve_rows(result.report.ccr_fpr_curve),
                           columns=['fpr', 'ccr'])
    if result.histogram is not None:
        ReportWriter.write_csv(out_dir / 'activation_histogram.csv', result.histogram.rows(),
                               columns=['bin_left', 'bin_right', 'known', 'unknown'])
    if result.confusion is not None:
        rows = (ReportWriter.matrix_rows(result.confusion.known, 'known')
                + ReportWriter.matrix_rows(result.confusion.unknown, 'unknown'))
        ReportWriter.write_csv(out_dir / 'projection_confusion.csv', rows,
                               columns=['population', 'branch_a_class', 'branch_b_class', 'count'])
    logger.info(f"[Evaluation] Reports written to {out_dir}")
    return out_dir
