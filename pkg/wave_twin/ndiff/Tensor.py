# wave_twin/ndiff/Tensor.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Dense tensors with reverse-mode automatic differentiation.

Every operation on a Tensor that needs a gradient records a Node holding its
parents and a backward rule. backward() sorts the recorded graph into a Tape
and runs the rules in reverse, adding each result into the parents' grads.
Leaf gradients accumulate across calls until zero_grad().
"""

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from wave_twin.constants.DTwin import DTwinErr
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
BackwardRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_grad_enabled = True
_dtype: Any = np.float64


@contextmanager
def no_grad() -> Iterator[None]:
    """Evaluate without recording operations."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def grad_enabled() -> bool:
    return _grad_enabled


@contextmanager
def precision(dtype: Any) -> Iterator[None]:
    """
    Create every Tensor inside the block with the given float dtype.

    Training runs under float32. Gradient checks and everything outside a
    block use float64.
    """
    global _dtype
    previous = _dtype
    _dtype = np.dtype(dtype).type
    try:
        yield
    finally:
        _dtype = previous


def default_dtype() -> Any:
    return _dtype


@dataclass
class Node:
    """One recorded operation."""

    op: str
    parents: Tuple["Tensor", ...]
    rule: BackwardRule


class Tensor:
    """
    An n-dimensional float array that can take part in differentiation.

    Attributes:
        data (np.ndarray): Values
        requires_grad (bool): Whether gradients flow to this tensor
        grad (Optional[np.ndarray]): Accumulated gradient, same shape as data
        name (Optional[str]): Parameter name used in error messages
    """

    __array_priority__ = 100

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: Optional[str] = None,
        node: Optional[Node] = None,
    ) -> None:
        self.data = np.asarray(data, dtype=_dtype)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.node = node

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def backward(self) -> None:
        """
        Fill the gradients of every leaf this scalar depends on.

        Raises:
            InvalidArgumentError: If the tensor is not a scalar
        """
        if self.data.size != 1:
            raise InvalidArgumentError(DTwinErr.NON_SCALAR.format(shape=self.shape))
        Tape.collect(self).run(np.ones_like(self.data))

    # Operators delegate to the primitives in Ops (bound at the end of this module)
    def __add__(self, other: ArrayLike) -> "Tensor":
        return Ops.add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return Ops.add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return Ops.sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return Ops.sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return Ops.mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return Ops.mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return Ops.div(self, other)

    def __neg__(self) -> "Tensor":
        return Ops.mul(self, -1.0)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return Ops.matmul(self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        return Ops.take(self, index)

    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Ops.reshape(self, shape)

    def transpose(self, *axes: int) -> "Tensor":
        return Ops.transpose(self, axes or None)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def sum(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        return Ops.sum(self, axis, keepdims)

    def mean(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        return Ops.mean(self, axis, keepdims)


def as_tensor(value: ArrayLike) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def make(data: np.ndarray, op: str, parents: Sequence[Tensor], rule: BackwardRule) -> Tensor:
    """
    Wrap an operation result, recording it when a parent needs gradients.
    """
    parents = tuple(parents)
    if _grad_enabled and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, node=Node(op, parents, rule))
    return Tensor(data)


class Tape:
    """
    Recorded operations in topological order, from the leaves to the loss.
    """

    def __init__(self, loss: Tensor, nodes: List[Tensor]) -> None:
        self.loss = loss
        self.nodes = nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def ops(self) -> List[str]:
        return [t.node.op for t in self.nodes if t.node is not None]

    @classmethod
    def collect(cls, loss: Tensor) -> "Tape":
        order: List[Tensor] = []
        seen = set()
        stack: List[Tuple[Tensor, bool]] = [(loss, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                order.append(tensor)
                continue
            if id(tensor) in seen:
                continue
            seen.add(id(tensor))
            stack.append((tensor, True))
            if tensor.node is not None:
                for parent in tensor.node.parents:
                    if parent.requires_grad and id(parent) not in seen:
                        stack.append((parent, False))
        return cls(loss, order)

    def run(self, seed: np.ndarray) -> None:
        """
        Propagate `seed` from the loss back to the leaves.

        Intermediate gradients live only for the pass; leaf grads accumulate.
        """
        grads = {id(self.loss): np.asarray(seed, dtype=self.loss.data.dtype)}
        for tensor in reversed(self.nodes):
            g = grads.pop(id(tensor), None)
            if g is None:
                continue
            if tensor.node is None:
                g = g.astype(tensor.data.dtype, copy=False)
                tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g
                continue
            for parent, pg in zip(tensor.node.parents, tensor.node.rule(g)):
                if pg is None or not parent.requires_grad:
                    continue
                if pg.shape != parent.shape:
                    raise ShapeError(
                        DTwinErr.SHAPE.format(
                            op=f"{tensor.node.op} backward", a=pg.shape, b=parent.shape
                        ),
                        pg.shape,
                        parent.shape,
                    )
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg


from wave_twin.ndiff import Ops  # noqa: E402
