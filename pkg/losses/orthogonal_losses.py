from typing import List, NamedTuple, Union

import numpy as np

from models.dual_branch_model import BRANCH_A, BRANCH_B
from ndnum import functional as F
from ndnum.tensor import Tensor
from utils.errors import DimensionError


class PenaltyEntry(NamedTuple):
    sample_index: int
    branch: str
    class_index: int


def l_orth(p_a: Tensor, p_b: Tensor) -> Tensor:
    """(1/N) Σ_k (p_Ak · p_Bk)²"""
    if p_a.shape != p_b.shape:
        raise DimensionError("l_orth: prototype matrices differ in shape", p_a.shape, p_b.shape)
    per_class = F.sum(F.mul(p_a, p_b), axis=1)
    return F.mean(F.square(per_class))


def _values(x: Union[Tensor, np.ndarray]) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def penalty_set(sim_a: Union[Tensor, np.ndarray], sim_b: Union[Tensor, np.ndarray]) -> List[PenaltyEntry]:
    """Background samples whose nearest class agrees across branches.

    For each such sample the branch with the larger similarity at the shared
    class is penalized (ties go to A). The selection is read from values only,
    so no gradient flows through it.
    """
    sim_a, sim_b = _values(sim_a), _values(sim_b)
    if sim_a.shape != sim_b.shape:
        raise DimensionError("penalty_set: similarity matrices differ in shape", sim_a.shape, sim_b.shape)
    if sim_a.shape[0] == 0:
        return []

    k_a = np.argmax(sim_a, axis=1)
    k_b = np.argmax(sim_b, axis=1)
    selected = []
    for i in np.flatnonzero(k_a == k_b):
        k = int(k_a[i])
        branch = BRANCH_A if sim_a[i, k] >= sim_b[i, k] else BRANCH_B
        selected.append(PenaltyEntry(int(i), branch, k))
    return selected


def _branch_similarity_sum(entries: List[PenaltyEntry], z: Tensor, prototypes: Tensor) -> Tensor:
    rows = [e.sample_index for e in entries]
    cols = [e.class_index for e in entries]
    return F.sum(F.mul(F.take_rows(z, rows), F.take_rows(prototypes, cols)))


def l_pb(selected: List[PenaltyEntry], z_a: Tensor, z_b: Tensor, p_a: Tensor, p_b: Tensor) -> Tensor:
    """(1/M_pb) Σ z_bi · p_k over the penalized entries, each on its chosen branch"""
    if not selected:
        return Tensor(0.0)

    total = None
    for branch, z, prototypes in ((BRANCH_A, z_a, p_a), (BRANCH_B, z_b, p_b)):
        entries = [e for e in selected if e.branch == branch]
        if not entries:
            continue
        part = _branch_similarity_sum(entries, z, prototypes)
        total = part if total is None else F.add(total, part)
    return F.scale(total, 1.0 / len(selected))
