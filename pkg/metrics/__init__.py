from .osr_metrics import (
    EvalRecord,
    MetricReport,
    auroc,
    auroc_trapezoid,
    ccr_fpr_curve,
    closed_acc,
    evaluate_records,
    fpr_at_tpr,
    oscr,
)
from .diagnostics import (
    ActivationHistogram,
    ProjectionConfusion,
    activation_histogram,
    confusion_counts,
    histogram_overlap,
    projection_confusion,
)
