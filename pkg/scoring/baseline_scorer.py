from typing import Dict

import numpy as np

from interfaces.scorer_interface import IScorer
from models.dual_branch_model import DualBranchModel
from scoring.confidence_scorer import ConfidenceScorer, _as_matrix, branch_embeddings
from utils.errors import ConfigError


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class SoftmaxScorer(IScorer):
    """Maximum softmax probability over branch-A prototype logits"""

    name = 'softmax_confidence'

    def score(self, model: DualBranchModel, x: np.ndarray) -> np.ndarray:
        sim, _, _ = branch_embeddings(model.branch_a, _as_matrix(model, x))
        return _softmax(sim).max(axis=1)

    def predict(self, model: DualBranchModel, x: np.ndarray) -> np.ndarray:
        sim, _, _ = branch_embeddings(model.branch_a, _as_matrix(model, x))
        return np.argmax(sim, axis=1)


class PrototypeSimilarityScorer(IScorer):
    """max_k Sim(z, p_k) on branch A (plain prototype-learning rule)"""

    name = 'pl_similarity'

    def score(self, model: DualBranchModel, x: np.ndarray) -> np.ndarray:
        sim, _, _ = branch_embeddings(model.branch_a, _as_matrix(model, x))
        return sim.max(axis=1)

    def predict(self, model: DualBranchModel, x: np.ndarray) -> np.ndarray:
        sim, _, _ = branch_embeddings(model.branch_a, _as_matrix(model, x))
        return np.argmax(sim, axis=1)


SCORERS: Dict[str, IScorer] = {
    SoftmaxScorer.name: SoftmaxScorer(),
    PrototypeSimilarityScorer.name: PrototypeSimilarityScorer(),
    ConfidenceScorer.name: ConfidenceScorer(),
}

BASELINE_KINDS = (SoftmaxScorer.name, PrototypeSimilarityScorer.name)


def get_scorer(kind: str) -> IScorer:
    scorer = SCORERS.get(kind)
    if scorer is None:
        raise ConfigError(f"Unknown scorer kind: {kind}. Supported kinds: {', '.join(SCORERS)}")
    return scorer


def baseline_scores(kind: str, model: DualBranchModel, x: np.ndarray) -> np.ndarray:
    """Per-sample scalar from one of the baseline rules"""
    if kind not in BASELINE_KINDS:
        raise ConfigError(f"Unknown baseline kind: {kind}. Supported kinds: {', '.join(BASELINE_KINDS)}")
    return get_scorer(kind).score(model, x)
