"""Finite-difference audit of every loss term on small random problems.

Each check perturbs prototypes, embeddings or the final encoder weight; hidden
ReLU layers stay fixed, and points whose residuals sit near a kink of L_n are
redrawn. The penalty set is frozen at its unperturbed value.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from losses.loss_types import Batch, LossWeights
from losses.orthogonal_losses import PenaltyEntry, l_orth, l_pb, penalty_set
from losses.prototype_losses import L1_REGIME_SWITCH, dce_loss, l_f, l_faem, l_fb
from losses.total_loss import total_loss
from models.dual_branch_model import Branch, DualBranchModel, encode, init_model, similarity_matrix
from models.encoder import EncoderConfig
from ndnum import functional as F
from ndnum.gradcheck import grad_check
from ndnum.tensor import Tensor
from utils.errors import NumericError

logger = logging.getLogger(__name__)

TOLERANCE = 1e-5
DEFAULT_POINTS = 10
KINK_MARGIN = 1e-3
MAX_REDRAWS = 200

TERMS = ('dce', 'l_f', 'l_fb', 'l_faem', 'l_orth', 'l_pb', 'total')

_N_CLASSES = 3
_INPUT_DIM = 5
_CHECK_ENCODER = EncoderConfig(input_dim=_INPUT_DIM, hidden_dims=(6,), feature_dim=4)
_M_KNOWN = 6
_M_BACKGROUND = 9

Check = Tuple[Callable[[Tensor], Tensor], Tensor]


@dataclass
class GradcheckReport:
    errors: Dict[str, float] = field(default_factory=dict)
    points: int = 0
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return all(error < self.tolerance for error in self.errors.values())

    def to_dict(self) -> Dict[str, object]:
        return {'errors': dict(self.errors), 'points': self.points, 'tolerance': self.tolerance,
                'passed': self.passed}


@dataclass
class _Point:
    model: DualBranchModel
    batch: Batch
    selected: List[PenaltyEntry]
    z_a: Tensor
    z_b_known: Tensor
    zb_a: Tensor
    zb_b: Tensor


def _near_kink(residual: np.ndarray) -> bool:
    l1 = np.abs(residual).sum(axis=1)
    return bool((np.abs(residual) < KINK_MARGIN).any() or (np.abs(l1 - L1_REGIME_SWITCH) < KINK_MARGIN).any())


def _draw_point(rng: np.random.Generator) -> Optional[_Point]:
    model = init_model(_CHECK_ENCODER, _N_CLASSES, int(rng.integers(2 ** 31)), dual=True)
    batch = Batch(
        known_x=Tensor(rng.standard_normal((_M_KNOWN, _INPUT_DIM))),
        known_y=rng.integers(0, _N_CLASSES, size=_M_KNOWN),
        background_x=Tensor(rng.standard_normal((_M_BACKGROUND, _INPUT_DIM))),
    )
    z_a, zb_a = encode(model.branch_a, batch.known_x).detach(), encode(model.branch_a, batch.background_x).detach()
    z_b, zb_b = encode(model.branch_b, batch.known_x).detach(), encode(model.branch_b, batch.background_x).detach()

    for branch, z, zb in ((model.branch_a, z_a, zb_a), (model.branch_b, z_b, zb_b)):
        p = branch.prototypes.data
        if _near_kink(z.data - p[batch.known_y]) or _near_kink(zb.data - p.mean(axis=0)):
            return None

    selected = penalty_set(similarity_matrix(model.branch_a, zb_a), similarity_matrix(model.branch_b, zb_b))
    if not selected:
        return None
    return _Point(model=model, batch=batch, selected=selected, z_a=z_a, z_b_known=z_b, zb_a=zb_a, zb_b=zb_b)


def _with_prototypes(branch: Branch, prototypes: Tensor) -> Branch:
    return replace(branch, prototypes=prototypes)


def _with_last_weight(branch: Branch, weight: Tensor) -> Branch:
    encoder = replace(branch.encoder, weights=[*branch.encoder.weights[:-1], weight])
    return replace(branch, encoder=encoder)


def _checks(point: _Point, weights: LossWeights) -> Dict[str, List[Check]]:
    model, batch, selected = point.model, point.batch, point.selected
    a, b = model.branch_a, model.branch_b
    p_a, p_b = a.prototypes.detach(), b.prototypes.detach()
    labels = batch.known_y

    def total_with(branch_a: Branch = a, branch_b: Branch = b) -> Tensor:
        return total_loss(replace(model, branch_a=branch_a, branch_b=branch_b), batch, weights, selected)[0]

    return {
        'dce': [(lambda t: dce_loss(t, labels), similarity_matrix(a, point.z_a).detach())],
        'l_f': [
            (lambda t: l_f(t, labels, p_a), point.z_a),
            (lambda t: l_f(point.z_a, labels, t), p_a),
        ],
        'l_fb': [
            (lambda t: l_fb(t, F.mean(p_a, axis=0)), point.zb_a),
            (lambda t: l_fb(point.zb_a, F.mean(t, axis=0)), p_a),
        ],
        'l_faem': [
            (lambda t: l_faem(_with_prototypes(a, t), batch, weights), p_a),
            (lambda t: l_faem(_with_last_weight(a, t), batch, weights), a.encoder.weights[-1].detach()),
        ],
        'l_orth': [
            (lambda t: l_orth(t, p_b), p_a),
            (lambda t: l_orth(p_a, t), p_b),
        ],
        'l_pb': [
            (lambda t: l_pb(selected, t, point.zb_b, p_a, p_b), point.zb_a),
            (lambda t: l_pb(selected, point.zb_a, t, p_a, p_b), point.zb_b),
            (lambda t: l_pb(selected, point.zb_a, point.zb_b, t, p_b), p_a),
            (lambda t: l_pb(selected, point.zb_a, point.zb_b, p_a, t), p_b),
        ],
        'total': [
            (lambda t: total_with(branch_a=_with_prototypes(a, t)), p_a),
            (lambda t: total_with(branch_b=_with_prototypes(b, t)), p_b),
            (lambda t: total_with(branch_b=_with_last_weight(b, t)), b.encoder.weights[-1].detach()),
        ],
    }


def run_gradcheck(seed: int, points: int = DEFAULT_POINTS,
                  weights: Optional[LossWeights] = None) -> GradcheckReport:
    """Max relative error per loss term over `points` seeded random problems"""
    weights = weights or LossWeights()
    rng = np.random.default_rng(seed)
    report = GradcheckReport(errors={term: 0.0 for term in TERMS})

    while report.points < points:
        point = None
        for _ in range(MAX_REDRAWS):
            point = _draw_point(rng)
            if point is not None:
                break
        if point is None:
            raise NumericError(f"no kink-free check point found in {MAX_REDRAWS} draws")

        for term, checks in _checks(point, weights).items():
            for f, x in checks:
                report.errors[term] = max(report.errors[term], grad_check(f, x))
        report.points += 1

    for term in TERMS:
        logger.info(f"[GradCheck] {term}: max relative error {report.errors[term]:.3e}")
    return report
