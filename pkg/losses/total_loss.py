from typing import List, Optional, Tuple

from losses.loss_types import Batch, LossReport, LossWeights
from losses.orthogonal_losses import PenaltyEntry, l_orth, l_pb, penalty_set
from losses.prototype_losses import faem_terms
from models.dual_branch_model import DualBranchModel, similarity_matrix
from ndnum import functional as F
from ndnum.tensor import Tensor


def total_loss(model: DualBranchModel, batch: Batch, weights: LossWeights,
               selected: Optional[List[PenaltyEntry]] = None) -> Tuple[Tensor, LossReport]:
    """L_FAEM(A) + L_FAEM(B) + α·L_orth + β·L_Pb.

    A single-branch model contributes L_FAEM(A) only; the cross-branch terms
    are reported as 0. A given `selected` replaces the penalty set computed
    from the batch.
    """
    report = LossReport()
    terms_a = faem_terms(model.branch_a, batch)
    report.l_eps_a = terms_a.l_eps.item()
    report.l_f_a = terms_a.l_f.item()
    report.l_fb_a = terms_a.l_fb.item()
    total = terms_a.combine(weights)

    if model.dual:
        branch_a, branch_b = model.branch_a, model.branch_b
        terms_b = faem_terms(branch_b, batch)
        report.l_eps_b = terms_b.l_eps.item()
        report.l_f_b = terms_b.l_f.item()
        report.l_fb_b = terms_b.l_fb.item()

        orth = l_orth(branch_a.prototypes, branch_b.prototypes)
        if selected is None:
            selected = penalty_set(
                similarity_matrix(branch_a, terms_a.z_background.detach()),
                similarity_matrix(branch_b, terms_b.z_background.detach()),
            )
        penalty = l_pb(selected, terms_a.z_background, terms_b.z_background,
                       branch_a.prototypes, branch_b.prototypes)
        report.l_orth = orth.item()
        report.l_pb = penalty.item()
        report.m_pb = len(selected)

        total = F.add(total, terms_b.combine(weights))
        total = F.add(total, F.scale(orth, weights.alpha))
        total = F.add(total, F.scale(penalty, weights.beta))

    report.total = total.item()
    return total, report
