from .confidence_scorer import (
    REJECT,
    ConfidenceScorer,
    Decision,
    ScoredSample,
    ScoreTable,
    combine_confidence,
    decide,
    score_batch,
    score_sample,
)
from .baseline_scorer import BASELINE_KINDS, baseline_scores, get_scorer
from .threshold import calibrate_threshold
