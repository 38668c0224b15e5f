# wave_twin/ndiff/Ops.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Differentiable primitives.

Each primitive computes its forward value with numpy and records an exact
backward rule. Binary arithmetic broadcasts like numpy; the backward rule
sums the gradient back down to each operand's shape.
"""

from typing import Any, Optional, Sequence, Tuple

import numpy as np

from wave_twin.constants.DTwin import DTwinErr
from wave_twin.ndiff.Tensor import ArrayLike, Tensor, as_tensor, make
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError


def _shape_error(op: str, a: Tuple[int, ...], b: Tuple[int, ...]) -> ShapeError:
    return ShapeError(DTwinErr.SHAPE.format(op=op, a=a, b=b), a, b)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise _shape_error(op, a.shape, b.shape) from None


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast("add", a, b)
    return make(
        a.data + b.data,
        "add",
        (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)),
    )


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast("sub", a, b)
    return make(
        a.data - b.data,
        "sub",
        (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)),
    )


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast("mul", a, b)
    return make(
        a.data * b.data,
        "mul",
        (a, b),
        lambda g: (unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)),
    )


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast("div", a, b)
    return make(
        a.data / b.data,
        "div",
        (a, b),
        lambda g: (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        ),
    )


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """
    Matrix product over the last two axes, leading axes broadcast.

    Raises:
        ShapeError: If either operand has fewer than 2 axes or the inner
            dimensions differ
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise _shape_error("matmul", a.shape, b.shape)
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise _shape_error("matmul", a.shape, b.shape) from None

    def rule(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return unbroadcast(ga, a.shape), unbroadcast(gb, b.shape)

    return make(np.matmul(a.data, b.data), "matmul", (a, b), rule)


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    if not parts:
        raise InvalidArgumentError("concat of nothing")
    ref = parts[0].shape
    ax = axis % len(ref)
    for p in parts[1:]:
        if len(p.shape) != len(ref) or any(
            p.shape[i] != ref[i] for i in range(len(ref)) if i != ax
        ):
            raise _shape_error("concat", ref, p.shape)
    sizes = np.cumsum([p.shape[ax] for p in parts])[:-1]

    def rule(g: np.ndarray) -> Sequence[np.ndarray]:
        return np.split(g, sizes, axis=ax)

    return make(np.concatenate([p.data for p in parts], axis=ax), "concat", parts, rule)


def take(x: ArrayLike, index: Any) -> Tensor:
    """Basic or advanced indexing (slicing); the backward rule scatter-adds."""
    x = as_tensor(x)

    def rule(g: np.ndarray) -> Tuple[np.ndarray]:
        out = np.zeros_like(x.data)
        np.add.at(out, index, g)
        return (out,)

    return make(np.array(x.data[index], copy=True), "slice", (x,), rule)


def slice_axis(x: ArrayLike, start: int, stop: int, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    index = [slice(None)] * x.ndim
    index[axis] = slice(start, stop)
    return take(x, tuple(index))


def transpose(x: ArrayLike, axes: Optional[Sequence[int]] = None) -> Tensor:
    x = as_tensor(x)
    perm = tuple(axes) if axes else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(perm))
    return make(
        np.transpose(x.data, perm), "transpose", (x,), lambda g: (np.transpose(g, inverse),)
    )


def reshape(x: ArrayLike, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError:
        raise _shape_error("reshape", x.shape, tuple(shape)) from None
    return make(out, "reshape", (x,), lambda g: (g.reshape(x.shape),))


def sum(x: ArrayLike, axis: Any = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)

    def rule(g: np.ndarray) -> Tuple[np.ndarray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return make(np.sum(x.data, axis=axis, keepdims=keepdims), "sum", (x,), rule)


def mean(x: ArrayLike, axis: Any = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return mul(sum(x, axis, keepdims), 1.0 / count)


def relu(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    on = x.data > 0
    return make(np.where(on, x.data, 0.0), "relu", (x,), lambda g: (g * on,))


def leaky_relu(x: ArrayLike, slope: float = 0.2) -> Tensor:
    x = as_tensor(x)
    factor = np.where(x.data > 0, 1.0, slope)
    return make(x.data * factor, "leaky_relu", (x,), lambda g: (g * factor,))


def softmax(x: ArrayLike, axis: int = -1, mask: Optional[np.ndarray] = None) -> Tensor:
    """
    Softmax along `axis`; entries where `mask` is False get probability 0.

    Raises:
        InvalidArgumentError: If the axis is empty or a mask leaves a slice
            with no allowed entry
    """
    x = as_tensor(x)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise InvalidArgumentError(DTwinErr.EMPTY_SOFTMAX.format(axis=axis))
    logits = x.data
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
        if not np.all(mask.any(axis=axis)):
            raise InvalidArgumentError(DTwinErr.EMPTY_SOFTMAX.format(axis=axis))
        logits = np.where(mask, logits, -np.inf)
    shifted = logits - np.max(logits, axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def rule(g: np.ndarray) -> Tuple[np.ndarray]:
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return make(s, "softmax", (x,), rule)


def segment_sum_array(values: np.ndarray, segments: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n,) + values.shape[1:])
    np.add.at(out, segments, values)
    return out


def segment_softmax(scores: ArrayLike, segments: np.ndarray, n_segments: int) -> Tensor:
    """
    Softmax over the rows of `scores` that share a segment id.

    Used for attention over each destination node's incoming edges. Every
    segment's rows sum to one along axis 0; empty segments contribute nothing.
    """
    scores = as_tensor(scores)
    segments = np.asarray(segments, dtype=np.int64)
    if scores.shape[0] != segments.shape[0]:
        raise _shape_error("segment_softmax", scores.shape, segments.shape)
    peak = np.full((n_segments,) + scores.shape[1:], -np.inf)
    np.maximum.at(peak, segments, scores.data)
    e = np.exp(scores.data - peak[segments])
    s = e / segment_sum_array(e, segments, n_segments)[segments]

    def rule(g: np.ndarray) -> Tuple[np.ndarray]:
        dot = segment_sum_array(g * s, segments, n_segments)[segments]
        return (s * (g - dot),)

    return make(s, "segment_softmax", (scores,), rule)


def gather(x: ArrayLike, index: np.ndarray) -> Tensor:
    """Rows of x picked by `index` (repeats allowed)."""
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= x.shape[0]):
        raise _shape_error("gather", x.shape, (int(index.max()) + 1,))

    def rule(g: np.ndarray) -> Tuple[np.ndarray]:
        return (segment_sum_array(g, index, x.shape[0]),)

    return make(x.data[index], "gather", (x,), rule)


def scatter_add(x: ArrayLike, index: np.ndarray, n: int) -> Tensor:
    """Sum the rows of x into n output rows by `index`."""
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.int64)
    if index.shape[0] != x.shape[0]:
        raise _shape_error("scatter_add", x.shape, index.shape)
    return make(
        segment_sum_array(x.data, index, n), "scatter_add", (x,), lambda g: (g[index],)
    )


def dropout(
    x: ArrayLike, p: float, train: bool, rng: Optional[np.random.Generator] = None
) -> Tensor:
    """
    Inverted dropout. The identity when not training or when p is 0.
    """
    x = as_tensor(x)
    if not 0.0 <= p < 1.0:
        raise InvalidArgumentError(f"dropout rate {p} outside [0, 1)")
    if not train or p == 0.0:
        return x
    rng = rng if rng is not None else np.random.default_rng()
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    return make(x.data * keep, "dropout", (x,), lambda g: (g * keep,))


def mse(pred: ArrayLike, target: ArrayLike, mask: Optional[np.ndarray] = None) -> Tensor:
    """
    Mean squared error over the entries where `mask` is True.

    Raises:
        ShapeError: If pred, target and mask shapes differ
        InvalidArgumentError: If the mask selects nothing
    """
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise _shape_error("mse", pred.shape, target.shape)
    if mask is None:
        mask = np.ones(pred.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != pred.shape:
        raise _shape_error("mse mask", pred.shape, mask.shape)
    count = int(mask.sum())
    if count == 0:
        raise InvalidArgumentError(DTwinErr.EMPTY_MASK)
    diff = np.where(mask, pred.data - target.data, 0.0)

    def rule(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d = 2.0 * g * diff / count
        return d, -d

    return make(np.asarray((diff * diff).sum() / count), "mse", (pred, target), rule)
