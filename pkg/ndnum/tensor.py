import itertools
import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import ContractError

logger = logging.getLogger(__name__)

# Recording order of every node; reverse order is a valid topological order
_recording_counter = itertools.count()

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """Dense float64 array with optional reverse-mode gradient tracking.

    Every operation producing a Tensor records its parents and a backward
    function mapping the upstream gradient to one gradient per parent. The
    graph is rebuilt on every forward pass (tape style).
    """

    __slots__ = ('data', 'requires_grad', 'grad', '_parents', '_backward', '_op', '_order')

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple['Tensor', ...] = ()
        self._backward: Optional[BackwardFn] = None
        self._op = ''
        self._order = next(_recording_counter)

    @classmethod
    def _record(cls, data: np.ndarray, parents: Iterable['Tensor'], op: str,
                backward: BackwardFn) -> 'Tensor':
        """Create an interior node; it tracks gradients iff any parent does"""
        parents = tuple(parents)
        out = cls.__new__(cls)
        out.data = np.asarray(data, dtype=np.float64)
        out.requires_grad = any(p.requires_grad for p in parents)
        out.grad = None
        out._parents = parents if out.requires_grad else ()
        out._backward = backward if out.requires_grad else None
        out._op = op
        out._order = next(_recording_counter)
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> 'Tensor':
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        flag = ', requires_grad=True' if self.requires_grad else ''
        return f"Tensor(shape={self.shape}{flag}, op='{self._op}')"

    # Operator sugar; the implementations live in ndnum.functional
    def __add__(self, other):
        from ndnum import functional as F
        return F.add(self, other) if isinstance(other, Tensor) else F.add_scalar(self, other)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        from ndnum import functional as F
        return F.sub(self, other) if isinstance(other, Tensor) else F.add_scalar(self, -other)

    def __rsub__(self, other):
        from ndnum import functional as F
        return F.add_scalar(F.neg(self), other)

    def __mul__(self, other):
        from ndnum import functional as F
        return F.mul(self, other) if isinstance(other, Tensor) else F.scale(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        from ndnum import functional as F
        if isinstance(other, Tensor):
            raise ContractError("division by a tensor is not supported")
        return F.scale(self, 1.0 / other)

    def __neg__(self):
        from ndnum import functional as F
        return F.neg(self)

    def __matmul__(self, other):
        from ndnum import functional as F
        return F.matmul(self, other)


def _topological_nodes(root: Tensor) -> List[Tensor]:
    """All gradient-tracking nodes reachable from root, latest recorded first"""
    seen: Dict[int, Tensor] = {}
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen or not node.requires_grad:
            continue
        seen[id(node)] = node
        stack.extend(node._parents)
    return sorted(seen.values(), key=lambda n: n._order, reverse=True)


def backward(root: Tensor) -> None:
    """Backpropagate from a scalar root into every reachable leaf.

    Leaf gradients accumulate across calls; call zero_grad() on the leaves
    between passes. Interior gradients live only for the duration of a pass.
    """
    if root.data.size != 1:
        raise ContractError(f"backward() needs a scalar root, got shape {root.shape}")
    if not root.requires_grad:
        return

    pending: Dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
    for node in _topological_nodes(root):
        upstream = pending.pop(id(node), None)
        if upstream is None:
            continue
        if node.is_leaf:
            node.grad = upstream.copy() if node.grad is None else node.grad + upstream
            continue
        for parent, grad in zip(node._parents, node._backward(upstream)):
            if grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            pending[key] = grad if key not in pending else pending[key] + grad


def parameters_zero_grad(params: Iterable[Tensor]) -> None:
    for p in params:
        p.zero_grad()
