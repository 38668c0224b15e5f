# wave_twin/ndiff/GradCheck.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass
from typing import Callable, Dict, Mapping

import numpy as np

from wave_twin.constants.DTwin import DTrain
from wave_twin.ndiff.Tensor import Tensor, no_grad, precision


@dataclass(frozen=True)
class GradCheckResult:
    name: str
    max_rel_err: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.max_rel_err)) and self.max_rel_err < self.tol


def relative_error(
    analytic: np.ndarray, numeric: np.ndarray, atol: float = DTrain.GRADCHECK_ATOL
) -> float:
    """
    Largest elementwise max(|a - n| - atol, 0) / max(|a|, |n|).

    Differences up to atol count as exact. Anything above it is scaled by
    the gradient itself, whatever its magnitude.
    """
    if analytic.size == 0:
        return 0.0
    diff = np.maximum(np.abs(analytic - numeric) - atol, 0.0)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    ratio = np.divide(diff, scale, out=np.zeros_like(diff), where=scale > 0)
    return float(np.max(ratio))


def numeric_gradient(loss_fn: Callable[[], Tensor], param: Tensor, h: float) -> np.ndarray:
    """Central differences of a scalar loss with respect to one tensor."""
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = loss_fn().item()
            flat[i] = keep - h
            down = loss_fn().item()
            flat[i] = keep
            out[i] = (up - down) / (2.0 * h)
    return grad


def check_gradients(
    name: str,
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = DTrain.GRADCHECK_H,
    tol: float = DTrain.GRADCHECK_TOL,
) -> GradCheckResult:
    """
    Compare backward() against central finite differences in float64.

    Args:
        name (str): Label of the case
        loss_fn (Callable[[], Tensor]): Recomputes the scalar loss from the
            current parameter values
        params (Mapping[str, Tensor]): Tensors to differentiate
        h (float): Finite-difference step
        tol (float): Pass threshold on the relative error

    Returns:
        GradCheckResult: The worst relative error over all tensors
    """
    for p in params.values():
        p.data = np.array(p.data, dtype=np.float64, copy=True)
        p.zero_grad()
    worst = 0.0
    with precision(np.float64):
        loss_fn().backward()
        analytic: Dict[str, np.ndarray] = {
            k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
            for k, p in params.items()
        }
        for k, p in params.items():
            worst = max(worst, relative_error(analytic[k], numeric_gradient(loss_fn, p, h)))
    for p in params.values():
        p.zero_grad()
    return GradCheckResult(name, worst, tol)
