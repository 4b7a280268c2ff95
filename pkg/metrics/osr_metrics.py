"""Open-set evaluation: AUROC (known vs unknown separation), OSCR (area under
the correct-classification-rate vs false-positive-rate curve) and closed-set
accuracy."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from utils.errors import DataError

KNOWN_RETENTION = 0.95


@dataclass
class EvalRecord:
    is_known: bool
    true_class: int
    predicted_class: int
    score: float
    activation: Optional[float] = None
    sample_id: Optional[int] = None


@dataclass
class MetricReport:
    auroc: float
    oscr: float
    closed_acc: float
    ccr_fpr_curve: List[Tuple[float, float]] = field(default_factory=list)
    n_known: int = 0
    n_unknown: int = 0
    fpr_at_95_tpr: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'auroc': self.auroc,
            'oscr': self.oscr,
            'closed_acc': self.closed_acc,
            'fpr_at_95_tpr': self.fpr_at_95_tpr,
            'n_known': self.n_known,
            'n_unknown': self.n_unknown,
            'ccr_fpr_curve': [[fpr, ccr] for fpr, ccr in self.ccr_fpr_curve],
        }

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'MetricReport':
        return cls(
            auroc=float(values['auroc']),
            oscr=float(values['oscr']),
            closed_acc=float(values['closed_acc']),
            ccr_fpr_curve=[(float(f), float(c)) for f, c in values.get('ccr_fpr_curve', [])],
            n_known=int(values.get('n_known', 0)),
            n_unknown=int(values.get('n_unknown', 0)),
            fpr_at_95_tpr=float(values.get('fpr_at_95_tpr', 0.0)),
        )


def _split_scores(records: Sequence[EvalRecord]) -> Tuple[np.ndarray, np.ndarray]:
    known = np.array([r.score for r in records if r.is_known], dtype=np.float64)
    unknown = np.array([r.score for r in records if not r.is_known], dtype=np.float64)
    if known.size == 0:
        raise DataError("no known records to evaluate")
    if unknown.size == 0:
        raise DataError("no unknown records to evaluate")
    return known, unknown


def auroc(records: Sequence[EvalRecord]) -> float:
    """Mann-Whitney U / (n_known · n_unknown); ties count one half"""
    known, unknown = _split_scores(records)
    ranks = rankdata(np.concatenate([known, unknown]), method='average')
    n_k, n_u = known.size, unknown.size
    u_statistic = ranks[:n_k].sum() - n_k * (n_k + 1) / 2.0
    return float(u_statistic / (n_k * n_u))


def _grouped_counts(scores: np.ndarray, *masks: np.ndarray) -> List[np.ndarray]:
    """Per distinct score (descending), how many entries of each mask share it"""
    order = np.argsort(-scores, kind='stable')
    sorted_scores = scores[order]
    starts = np.flatnonzero(np.r_[True, sorted_scores[1:] != sorted_scores[:-1]])
    return [np.add.reduceat(mask[order].astype(np.int64), starts) for mask in masks]


def auroc_trapezoid(records: Sequence[EvalRecord]) -> float:
    """ROC area by trapezoidal integration over distinct score thresholds"""
    known, unknown = _split_scores(records)
    scores = np.concatenate([known, unknown])
    is_known = np.r_[np.ones(known.size, bool), np.zeros(unknown.size, bool)]
    known_counts, unknown_counts = _grouped_counts(scores, is_known, ~is_known)
    tpr = np.r_[0, np.cumsum(known_counts)] / known.size
    fpr = np.r_[0, np.cumsum(unknown_counts)] / unknown.size
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def closed_acc(records: Sequence[EvalRecord]) -> float:
    known = [r for r in records if r.is_known]
    if not known:
        raise DataError("closed-set accuracy needs at least one known record")
    return sum(r.predicted_class == r.true_class for r in known) / len(known)


def ccr_fpr_curve(records: Sequence[EvalRecord]) -> List[Tuple[float, float]]:
    """(FPR, CCR) for θ = +∞, every distinct score (descending), −∞; counts use score > θ"""
    known, unknown = _split_scores(records)
    scores = np.array([r.score for r in records], dtype=np.float64)
    is_known = np.array([r.is_known for r in records])
    correct = np.array([r.is_known and r.predicted_class == r.true_class for r in records])
    correct_counts, unknown_counts = _grouped_counts(scores, correct, ~is_known)

    # θ = s_j admits only the groups strictly above s_j
    correct_above = np.r_[0, 0, np.cumsum(correct_counts)]
    unknown_above = np.r_[0, 0, np.cumsum(unknown_counts)]
    fpr = unknown_above / unknown.size
    ccr = correct_above / known.size
    return list(zip(fpr.tolist(), ccr.tolist()))


def oscr(records: Sequence[EvalRecord]) -> Tuple[float, List[Tuple[float, float]]]:
    """Right-step area under the CCR-vs-FPR curve"""
    curve = ccr_fpr_curve(records)
    area = 0.0
    for (fpr_prev, _), (fpr_next, ccr_next) in zip(curve[:-1], curve[1:]):
        area += (fpr_next - fpr_prev) * ccr_next
    return float(area), curve


def fpr_at_tpr(records: Sequence[EvalRecord], retention: float = KNOWN_RETENTION) -> float:
    """Fraction of unknowns accepted (score > threshold) at the highest threshold
    that still accepts at least `retention` of the knowns"""
    known, unknown = _split_scores(records)
    known = np.sort(known)
    needed = int(np.ceil(retention * known.size - 1e-9))
    candidates = np.unique(known)
    accepted = known.size - np.searchsorted(known, candidates, side='right')
    feasible = candidates[accepted >= needed]
    threshold = feasible.max() if feasible.size else -np.inf
    return float(np.mean(unknown > threshold))


def evaluate_records(records: Sequence[EvalRecord]) -> MetricReport:
    known, unknown = _split_scores(records)
    area, curve = oscr(records)
    return MetricReport(
        auroc=auroc(records),
        oscr=area,
        closed_acc=closed_acc(records),
        ccr_fpr_curve=curve,
        n_known=int(known.size),
        n_unknown=int(unknown.size),
        fpr_at_95_tpr=fpr_at_tpr(records),
    )
