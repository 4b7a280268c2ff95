"""Differentiable operations on Tensor.

Binary elementwise operations require equal shapes; the only broadcasting
supported is a vector applied to every row of a matrix (add_row / sub_row).
Subgradients at kinks (|x| at 0, relu at 0, l2 norm at the zero vector) are 0.
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ndnum.tensor import Tensor
from utils.errors import DimensionError, NumericError

Axis = Optional[int]


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: operand shapes differ", a.shape, b.shape)


def tensor(data, requires_grad: bool = False) -> Tensor:
    return Tensor(data, requires_grad=requires_grad)


def zeros(shape: Union[int, Sequence[int]], requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=requires_grad)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul: inner dimensions disagree", a.shape, b.shape)
    a_data, b_data = a.data, b.data
    return Tensor._record(
        a_data @ b_data, (a, b), 'matmul',
        lambda g: (g @ b_data.T, a_data.T @ g)
    )


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise DimensionError("transpose: expected a matrix", x.shape)
    return Tensor._record(x.data.T, (x,), 'transpose', lambda g: (g.T,))


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape('add', a, b)
    return Tensor._record(a.data + b.data, (a, b), 'add', lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape('sub', a, b)
    return Tensor._record(a.data - b.data, (a, b), 'sub', lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape('mul', a, b)
    a_data, b_data = a.data, b.data
    return Tensor._record(a_data * b_data, (a, b), 'mul', lambda g: (g * b_data, g * a_data))


def add_row(x: Tensor, v: Tensor) -> Tensor:
    """x[i, :] + v for every row i"""
    if x.ndim != 2 or v.shape != (x.shape[1],):
        raise DimensionError("add_row: vector must match the matrix width", x.shape, v.shape)
    return Tensor._record(x.data + v.data, (x, v), 'add_row', lambda g: (g, g.sum(axis=0)))


def sub_row(x: Tensor, v: Tensor) -> Tensor:
    """x[i, :] - v for every row i"""
    if x.ndim != 2 or v.shape != (x.shape[1],):
        raise DimensionError("sub_row: vector must match the matrix width", x.shape, v.shape)
    return Tensor._record(x.data - v.data, (x, v), 'sub_row', lambda g: (g, -g.sum(axis=0)))


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    return Tensor._record(x.data * c, (x,), 'scale', lambda g: (g * c,))


def add_scalar(x: Tensor, c: float) -> Tensor:
    return Tensor._record(x.data + float(c), (x,), 'add_scalar', lambda g: (g,))


def neg(x: Tensor) -> Tensor:
    return Tensor._record(-x.data, (x,), 'neg', lambda g: (-g,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return Tensor._record(np.where(mask, x.data, 0.0), (x,), 'relu', lambda g: (g * mask,))


def square(x: Tensor) -> Tensor:
    x_data = x.data
    return Tensor._record(x_data * x_data, (x,), 'square', lambda g: (2.0 * x_data * g,))


def where(mask: np.ndarray, a: Tensor, b: Tensor) -> Tensor:
    """Elementwise select; the mask is a constant of the graph"""
    _same_shape('where', a, b)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.shape:
        raise DimensionError("where: mask shape differs from operands", mask.shape, a.shape)
    return Tensor._record(np.where(mask, a.data, b.data), (a, b), 'where',
                          lambda g: (g * mask, g * ~mask))


def _expand(g: np.ndarray, shape: Tuple[int, ...], axis: Axis) -> np.ndarray:
    if axis is not None:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape).copy()


def sum(x: Tensor, axis: Axis = None) -> Tensor:  # noqa: A001 - mirrors numpy naming
    shape = x.shape
    return Tensor._record(np.sum(x.data, axis=axis), (x,), 'sum',
                          lambda g: (_expand(g, shape, axis),))


def mean(x: Tensor, axis: Axis = None) -> Tensor:
    count = x.size if axis is None else x.shape[axis]
    return scale(sum(x, axis=axis), 1.0 / count)


def dot(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 1:
        raise DimensionError("dot: expected vectors", a.shape, b.shape)
    return sum(mul(a, b))


def l1_norm(x: Tensor, axis: Axis = None) -> Tensor:
    shape, sign = x.shape, np.sign(x.data)
    return Tensor._record(np.sum(np.abs(x.data), axis=axis), (x,), 'l1_norm',
                          lambda g: (_expand(g, shape, axis) * sign,))


def l2_norm(x: Tensor, axis: Axis = None) -> Tensor:
    shape, x_data = x.shape, x.data
    norm = np.sqrt(np.sum(x_data * x_data, axis=axis))

    def _backward(g):
        safe = np.where(norm > 0, norm, 1.0)
        ratio = np.where(norm > 0, g / safe, 0.0)
        return (_expand(ratio, shape, axis) * x_data,)

    return Tensor._record(norm, (x,), 'l2_norm', _backward)


def norms(x: Tensor) -> Tuple[Tensor, Tensor]:
    """(‖x‖₁, ‖x‖₂) over all entries"""
    return l1_norm(x), l2_norm(x)


def log_softmax(logits: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted log-softmax along the last axis (vector or row-wise)"""
    if logits.size == 0:
        raise DimensionError("log_softmax: empty input", logits.shape)
    if not np.all(np.isfinite(logits.data)):
        raise NumericError("log_softmax: input contains NaN or Inf")
    shifted = logits.data - np.max(logits.data, axis=axis, keepdims=True)
    out = shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    probs = np.exp(out)
    return Tensor._record(out, (logits,), 'log_softmax',
                          lambda g: (g - probs * np.sum(g, axis=axis, keepdims=True),))


def take_rows(x: Tensor, index: Sequence[int]) -> Tensor:
    """x[index] for a matrix; repeated indices accumulate gradient"""
    index = np.asarray(index, dtype=np.int64)
    shape = x.shape

    def _backward(g):
        grad = np.zeros(shape)
        np.add.at(grad, index, g)
        return (grad,)

    return Tensor._record(x.data[index], (x,), 'take_rows', _backward)


def gather(x: Tensor, rows: Sequence[int], cols: Sequence[int]) -> Tensor:
    """Vector of x[rows[i], cols[i]]"""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.shape != cols.shape:
        raise DimensionError("gather: index lists differ in length", rows.shape, cols.shape)
    shape = x.shape

    def _backward(g):
        grad = np.zeros(shape)
        np.add.at(grad, (rows, cols), g)
        return (grad,)

    return Tensor._record(x.data[rows, cols], (x,), 'gather', _backward)
