"""Per-branch objectives: DCE over prototype similarities and the
feature-activation terms aligning known features with their prototypes and
background features with the prototype center."""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from losses.loss_types import Batch, LossWeights
from models.dual_branch_model import Branch, center_prototype, encode, similarity_matrix
from ndnum import functional as F
from ndnum.tensor import Tensor
from utils.errors import DataError, DimensionError

L1_REGIME_SWITCH = 1.0


def _check_labels(labels: Sequence[int], n_rows: int, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n_rows,):
        raise DimensionError("labels must provide one entry per row", labels.shape, (n_rows,))
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise DataError(f"label out of range [0, {n_classes}): min={labels.min()}, max={labels.max()}")
    return labels


def dce_loss(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """Mean of -log softmax(logits)[label]; logits are similarities (= -distances)"""
    if logits.ndim != 2:
        raise DimensionError("dce_loss expects [M x N] logits", logits.shape)
    m, n = logits.shape
    labels = _check_labels(labels, m, n)
    log_probs = F.log_softmax(logits)
    return F.neg(F.mean(F.gather(log_probs, np.arange(m), labels)))


def smooth_norm_rows(u: Tensor) -> Tensor:
    """L_n applied to every row of u: ½‖u‖₂ when ‖u‖₁ < 1, else ‖u‖₁ − ½"""
    l1 = F.l1_norm(u, axis=1)
    l2 = F.l2_norm(u, axis=1)
    inside = l1.data < L1_REGIME_SWITCH
    return F.where(inside, F.scale(l2, 0.5), F.add_scalar(l1, -0.5))


def smooth_norm_loss(u: Tensor) -> Tensor:
    """L_n of a single vector (the first regime uses ‖u‖₂, not its square)"""
    l1, l2 = F.norms(u)
    if l1.item() < L1_REGIME_SWITCH:
        return F.scale(l2, 0.5)
    return F.add_scalar(l1, -0.5)


def l_f(z: Tensor, labels: Sequence[int], prototypes: Tensor) -> Tensor:
    """(1/M) Σ L_n(z_i − p_{y_i})"""
    if z.ndim != 2 or z.shape[1] != prototypes.shape[1]:
        raise DimensionError("l_f: feature width differs from prototype width", z.shape, prototypes.shape)
    labels = _check_labels(labels, z.shape[0], prototypes.shape[0])
    residual = F.sub(z, F.take_rows(prototypes, labels))
    return F.mean(smooth_norm_rows(residual))


def l_fb(z_b: Tensor, p_c: Tensor) -> Tensor:
    """(1/M_b) Σ L_n(z_bi − p_c); 0 without background samples"""
    if z_b.shape[0] == 0:
        return Tensor(0.0)
    return F.mean(smooth_norm_rows(F.sub_row(z_b, p_c)))


@dataclass
class FaemTerms:
    l_eps: Tensor
    l_f: Tensor
    l_fb: Tensor
    z_known: Tensor
    z_background: Tensor

    def combine(self, weights: LossWeights) -> Tensor:
        return F.add(F.add(self.l_eps, F.scale(self.l_f, weights.lam)), F.scale(self.l_fb, weights.gamma))


def faem_terms(branch: Branch, batch: Batch) -> FaemTerms:
    """Embed the batch once and evaluate the three FAEM terms on one branch"""
    z_known = encode(branch, batch.known_x)
    z_background = encode(branch, batch.background_x)
    return FaemTerms(
        l_eps=dce_loss(similarity_matrix(branch, z_known), batch.known_y),
        l_f=l_f(z_known, batch.known_y, branch.prototypes),
        l_fb=l_fb(z_background, center_prototype(branch)),
        z_known=z_known,
        z_background=z_background,
    )


def l_faem(branch: Branch, batch: Batch, weights: LossWeights) -> Tensor:
    """L_ε + λ·L_F + γ·L_Fb on one branch"""
    return faem_terms(branch, batch).combine(weights)
