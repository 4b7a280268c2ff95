import logging
from typing import Callable

import numpy as np

from ndnum.tensor import Tensor
from utils.errors import ContractError, NumericError

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5


def _evaluate(f: Callable[[Tensor], Tensor], data: np.ndarray) -> float:
    value = f(Tensor(data))
    if value.size != 1:
        raise ContractError(f"grad_check needs a scalar-valued function, got shape {value.shape}")
    value = value.item()
    if not np.isfinite(value):
        raise NumericError("grad_check: function evaluated to a non-finite value")
    return value


def grad_check(f: Callable[[Tensor], Tensor], x: Tensor, step: float = DEFAULT_STEP) -> float:
    """Compare reverse-mode gradients of f at x with central differences.

    Returns max over coordinates of |analytic - numeric| / max(1, |numeric|).
    """
    leaf = Tensor(x.data, requires_grad=True)
    root = f(leaf)
    if root.size != 1:
        raise ContractError(f"grad_check needs a scalar-valued function, got shape {root.shape}")
    if not np.isfinite(root.item()):
        raise NumericError("grad_check: function evaluated to a non-finite value")
    root.backward()
    analytic = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)

    worst = 0.0
    base = x.data.astype(np.float64)
    for idx in np.ndindex(base.shape):
        plus, minus = base.copy(), base.copy()
        plus[idx] += step
        minus[idx] -= step
        numeric = (_evaluate(f, plus) - _evaluate(f, minus)) / (2.0 * step)
        error = abs(analytic[idx] - numeric) / max(1.0, abs(numeric))
        worst = max(worst, error)

    logger.debug(f"[GradCheck] {base.size} coordinates, max relative error {worst:.3e}")
    return worst
