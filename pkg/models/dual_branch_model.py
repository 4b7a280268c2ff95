import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from models.encoder import Encoder, EncoderConfig
from ndnum import functional as F
from ndnum.tensor import Tensor
from utils.errors import ConfigError, DimensionError

logger = logging.getLogger(__name__)

# Branch B seed = seed XOR this constant, so both encoders differ deterministically
BRANCH_B_SEED_MASK = 0x5DEECE66D

BRANCH_A = 'A'
BRANCH_B = 'B'


@dataclass
class Branch:
    """One projection: an encoder and N learnable prototypes"""
    branch_id: str
    encoder: Encoder
    prototypes: Tensor

    @property
    def n_classes(self) -> int:
        return self.prototypes.shape[0]

    def parameters(self) -> List[Tensor]:
        return [*self.encoder.parameters(), self.prototypes]

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        prefix = f"branch_{self.branch_id.lower()}"
        return [*self.encoder.named_parameters(f"{prefix}.encoder"), (f"{prefix}.prototypes", self.prototypes)]


@dataclass
class DualBranchModel:
    """Two branches with identical structure but independent weights.

    With dual=False only branch A exists; this is the single-projection
    configuration used by the ablation rows without multiple projections.
    """
    branch_a: Branch
    branch_b: Optional[Branch]
    config: EncoderConfig
    n_classes: int
    seed: int

    @property
    def dual(self) -> bool:
        return self.branch_b is not None

    @property
    def branches(self) -> List[Branch]:
        return [self.branch_a] if self.branch_b is None else [self.branch_a, self.branch_b]

    def parameters(self) -> List[Tensor]:
        return [p for branch in self.branches for p in branch.parameters()]

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        return [item for branch in self.branches for item in branch.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()


def _init_branch(branch_id: str, config: EncoderConfig, n_classes: int, seed: int) -> Branch:
    rng = np.random.default_rng(seed)
    encoder = Encoder.initialize(config, rng)
    prototypes = Tensor(rng.standard_normal((n_classes, config.feature_dim)), requires_grad=True)
    return Branch(branch_id=branch_id, encoder=encoder, prototypes=prototypes)


def init_model(config: EncoderConfig, n_classes: int, seed: int, dual: bool = True) -> DualBranchModel:
    """Build a model deterministically from (config, n_classes, seed)"""
    if n_classes < 2:
        raise ConfigError(f"n_classes must be at least 2, got {n_classes}")
    branch_a = _init_branch(BRANCH_A, config, n_classes, seed)
    branch_b = _init_branch(BRANCH_B, config, n_classes, seed ^ BRANCH_B_SEED_MASK) if dual else None
    logger.debug(f"[Model] Initialized {'dual' if dual else 'single'}-branch model, N={n_classes}, seed={seed}")
    return DualBranchModel(branch_a=branch_a, branch_b=branch_b, config=config, n_classes=n_classes, seed=seed)


def encode(branch: Branch, x: Tensor) -> Tensor:
    """z = f(x) for a batch [batch x input_dim] -> [batch x d]"""
    return branch.encoder.forward(x)


def center_prototype(branch: Branch) -> Tensor:
    """Mean of the current prototypes; never cached"""
    return F.mean(branch.prototypes, axis=0)


def similarity_matrix(branch: Branch, z: Tensor) -> Tensor:
    """Entry (i, k) = z_i · p_k"""
    if z.ndim != 2 or z.shape[1] != branch.prototypes.shape[1]:
        raise DimensionError("similarity: feature width differs from prototype width",
                             z.shape, branch.prototypes.shape)
    return F.matmul(z, F.transpose(branch.prototypes))


def generalized_distance(branch: Branch, z: Tensor) -> Tensor:
    """d(z_i, p_k) = -z_i · p_k, computed through similarity_matrix"""
    return F.neg(similarity_matrix(branch, z))
