"""Unknown detection: per-branch known confidence Score = Sim · ‖z‖₁,
summed over branches into C_k; C_max = max_k C_k is compared with a threshold."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from interfaces.scorer_interface import IScorer
from models.dual_branch_model import Branch, DualBranchModel, encode, similarity_matrix
from ndnum.tensor import Tensor
from utils.errors import DimensionError

REJECT = -1


@dataclass
class ScoredSample:
    sim_a: np.ndarray
    act_a: float
    sim_b: Optional[np.ndarray]
    act_b: Optional[float]
    confidence: np.ndarray
    c_max: float
    k_star: int


@dataclass
class Decision:
    accepted: bool
    predicted_class: int
    threshold: float


@dataclass
class ScoreTable:
    """Vectorized scores for a batch; row i corresponds to sample i"""
    sim_a: np.ndarray
    act_a: np.ndarray
    sim_b: Optional[np.ndarray]
    act_b: Optional[np.ndarray]
    confidence: np.ndarray

    @property
    def k_star(self) -> np.ndarray:
        return np.argmax(self.confidence, axis=1)

    @property
    def c_max(self) -> np.ndarray:
        return self.confidence[np.arange(len(self.confidence)), self.k_star]

    def __len__(self) -> int:
        return len(self.confidence)

    def sample(self, i: int) -> ScoredSample:
        k = int(self.k_star[i])
        return ScoredSample(
            sim_a=self.sim_a[i].copy(),
            act_a=float(self.act_a[i]),
            sim_b=None if self.sim_b is None else self.sim_b[i].copy(),
            act_b=None if self.act_b is None else float(self.act_b[i]),
            confidence=self.confidence[i].copy(),
            c_max=float(self.confidence[i, k]),
            k_star=k,
        )


def _as_matrix(model: DualBranchModel, x) -> Tensor:
    data = x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
    if data.ndim == 1:
        data = data[None, :]
    if data.ndim != 2 or data.shape[1] != model.config.input_dim:
        raise DimensionError(f"expected samples of width {model.config.input_dim}", data.shape)
    return Tensor(data)


def branch_embeddings(branch: Branch, x: Tensor):
    """(similarities [n x N], activations ‖z‖₁ [n], embeddings [n x d]) as arrays"""
    z = encode(branch, x)
    sim = similarity_matrix(branch, z).data
    return sim, np.abs(z.data).sum(axis=1), z.data


def branch_scores(sim: np.ndarray, act: np.ndarray) -> np.ndarray:
    """Score(z, p_k) = Sim(z, p_k) · ‖z‖₁"""
    return sim * act[:, None]


def combine_confidence(sim_a: np.ndarray, act_a: np.ndarray,
                       sim_b: Optional[np.ndarray] = None, act_b: Optional[np.ndarray] = None) -> ScoreTable:
    """C_k = Score_A + Score_B with no normalization; branch B is optional"""
    sim_a = np.atleast_2d(np.asarray(sim_a, dtype=np.float64))
    act_a = np.atleast_1d(np.asarray(act_a, dtype=np.float64))
    confidence = branch_scores(sim_a, act_a)
    if sim_b is not None:
        sim_b = np.atleast_2d(np.asarray(sim_b, dtype=np.float64))
        act_b = np.atleast_1d(np.asarray(act_b, dtype=np.float64))
        confidence = confidence + branch_scores(sim_b, act_b)
    return ScoreTable(sim_a=sim_a, act_a=act_a, sim_b=sim_b, act_b=act_b, confidence=confidence)


def score_batch(model: DualBranchModel, x) -> ScoreTable:
    x = _as_matrix(model, x)
    sim_a, act_a, _ = branch_embeddings(model.branch_a, x)
    if not model.dual:
        return combine_confidence(sim_a, act_a)
    sim_b, act_b, _ = branch_embeddings(model.branch_b, x)
    return combine_confidence(sim_a, act_a, sim_b, act_b)


def score_sample(model: DualBranchModel, x) -> ScoredSample:
    return score_batch(model, x).sample(0)


def decide(scored: ScoredSample, threshold: float) -> Decision:
    """Accept iff C_max is strictly greater than the threshold"""
    accepted = bool(scored.c_max > threshold)
    return Decision(
        accepted=accepted,
        predicted_class=scored.k_star if accepted else REJECT,
        threshold=float(threshold),
    )


class ConfidenceScorer(IScorer):
    """C_max over both branches (or over branch A alone for single-branch models)"""

    name = 'confidence'

    def score(self, model: DualBranchModel, x: np.ndarray) -> np.ndarray:
        return score_batch(model, x).c_max

    def predict(self, model: DualBranchModel, x: np.ndarray) -> np.ndarray:
        return score_batch(model, x).k_star
