# wave_twin/ndiff/Adam.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

import numpy as np

from wave_twin.constants.DTwin import DTrain, DTwinErr
from wave_twin.ndiff.Tensor import Tensor
from wave_twin.utils.TwinErrors import DivergenceError, ShapeError


@dataclass
class AdamState:
    """
    Moments and step counter of the Adam optimizer.
    """

    lr: float = DTrain.LR
    beta1: float = DTrain.BETA1
    beta2: float = DTrain.BETA2
    eps: float = DTrain.EPS
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def hyper(self) -> Dict[str, Any]:
        return {
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "t": self.t,
        }


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
) -> Dict[str, np.ndarray]:
    """
    One bias-corrected Adam update.

    Missing gradients count as zero. The state's moments and step counter
    advance; the inputs are not modified.

    Args:
        params (Mapping[str, np.ndarray]): Parameter values by name
        grads (Mapping[str, Optional[np.ndarray]]): Gradients by name
        state (AdamState): Optimizer state

    Returns:
        Dict[str, np.ndarray]: Updated parameter values

    Raises:
        DivergenceError: A gradient holds NaN, naming the parameter
        ShapeError: A gradient's shape differs from its parameter's
    """
    for name, g in grads.items():
        if g is not None and np.isnan(g).any():
            raise DivergenceError(DTwinErr.NAN_GRAD.format(name=name), name=name)
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    out: Dict[str, np.ndarray] = {}
    for name, p in params.items():
        g = grads.get(name)
        g = np.zeros_like(p) if g is None else g
        if g.shape != p.shape:
            raise ShapeError(
                DTwinErr.SHAPE.format(op=f"adam {name}", a=g.shape, b=p.shape), g.shape, p.shape
            )
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name] = m
        state.v[name] = v
        out[name] = p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return out


class Adam:
    """
    Adam over a named set of parameter tensors.
    """

    def __init__(self, params: Mapping[str, Tensor], state: Optional[AdamState] = None) -> None:
        self.params = dict(params)
        self.state = state or AdamState()

    def step(self) -> None:
        values = {n: p.data for n, p in self.params.items()}
        grads = {n: p.grad for n, p in self.params.items()}
        for name, value in adam_step(values, grads, self.state).items():
            self.params[name].data = value.astype(self.params[name].data.dtype, copy=False)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()
