"""Diagnostics: feature-activation histograms of known vs unknown samples and
cross-branch projection confusion."""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from metrics.osr_metrics import EvalRecord
from models.dual_branch_model import DualBranchModel
from scoring.confidence_scorer import _as_matrix, branch_embeddings, branch_scores
from utils.errors import ConfigError, DataError

DEFAULT_BINS = 50


@dataclass
class ActivationHistogram:
    bin_edges: np.ndarray
    known: np.ndarray
    unknown: np.ndarray
    overlap: float

    def rows(self):
        for i in range(len(self.known)):
            yield {
                'bin_left': float(self.bin_edges[i]),
                'bin_right': float(self.bin_edges[i + 1]),
                'known': float(self.known[i]),
                'unknown': float(self.unknown[i]),
            }


def histogram_overlap(known_values: Sequence[float], unknown_values: Sequence[float],
                      bins: int = DEFAULT_BINS) -> ActivationHistogram:
    """Per-population histograms over shared bins, each summing to 1; overlap = Σ min"""
    if bins < 2:
        raise ConfigError(f"bins must be at least 2, got {bins}")
    known = np.asarray(known_values, dtype=np.float64)
    unknown = np.asarray(unknown_values, dtype=np.float64)
    if known.size == 0:
        raise DataError("activation histogram: known population is empty")
    if unknown.size == 0:
        raise DataError("activation histogram: unknown population is empty")

    both = np.concatenate([known, unknown])
    edges = np.histogram_bin_edges(both, bins=bins, range=(both.min(), both.max()))
    known_hist = np.histogram(known, bins=edges)[0] / known.size
    unknown_hist = np.histogram(unknown, bins=edges)[0] / unknown.size
    overlap = float(np.minimum(known_hist, unknown_hist).sum())
    return ActivationHistogram(bin_edges=edges, known=known_hist, unknown=unknown_hist, overlap=overlap)


def activation_histogram(records: Sequence[EvalRecord], bins: int = DEFAULT_BINS) -> ActivationHistogram:
    missing = [r for r in records if r.activation is None]
    if missing:
        raise DataError(f"{len(missing)} records carry no activation value")
    return histogram_overlap(
        [r.activation for r in records if r.is_known],
        [r.activation for r in records if not r.is_known],
        bins=bins,
    )


@dataclass
class ProjectionConfusion:
    """Rows: argmax class in branch A; columns: argmax class in branch B"""
    known: np.ndarray
    unknown: np.ndarray

    @staticmethod
    def diagonal_fraction(matrix: np.ndarray) -> float:
        total = matrix.sum()
        return float(np.trace(matrix) / total) if total else 0.0

    @property
    def known_diagonal(self) -> float:
        return self.diagonal_fraction(self.known)

    @property
    def unknown_diagonal(self) -> float:
        return self.diagonal_fraction(self.unknown)


def confusion_counts(rows: Sequence[int], cols: Sequence[int], n_classes: int) -> np.ndarray:
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)), 1)
    return counts


def _branch_argmax(model: DualBranchModel, samples: np.ndarray):
    x = _as_matrix(model, samples)
    sim_a, act_a, _ = branch_embeddings(model.branch_a, x)
    sim_b, act_b, _ = branch_embeddings(model.branch_b, x)
    return np.argmax(branch_scores(sim_a, act_a), axis=1), np.argmax(branch_scores(sim_b, act_b), axis=1)


def projection_confusion(model: DualBranchModel, known_samples: np.ndarray,
                         unknown_samples: np.ndarray) -> ProjectionConfusion:
    """N×N counts of (argmax_k Score_A, argmax_k Score_B) per population"""
    if not model.dual:
        raise ConfigError("projection confusion needs a two-branch model")
    matrices = []
    for samples in (known_samples, unknown_samples):
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape[0] == 0:
            matrices.append(np.zeros((model.n_classes, model.n_classes), dtype=np.int64))
            continue
        rows, cols = _branch_argmax(model, samples)
        matrices.append(confusion_counts(rows, cols, model.n_classes))
    return ProjectionConfusion(known=matrices[0], unknown=matrices[1])
