# wave_twin/harness/GradSuite.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Finite-difference checks over every differentiable primitive and layer.

Each case builds small random inputs and reduces its output to a scalar
through a fixed random weighting so that every output entry matters.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from wave_twin.constants.DTwin import DGraph, DTrain
from wave_twin.mpnn.GATConv import Combine, GATConv
from wave_twin.mpnn.GCNConv import GCNConv
from wave_twin.mpnn.Module import Linear
from wave_twin.mpnn.SAGEConv import SAGEConv
from wave_twin.mpnn.SelfAttention import TemporalSelfAttention, causal_mask
from wave_twin.ndiff import Ops
from wave_twin.ndiff.GradCheck import GradCheckResult, check_gradients
from wave_twin.ndiff.Tensor import Tensor
from wave_twin.utils.TwinErrors import InvalidArgumentError

Case = Tuple[Callable[[], Tensor], Dict[str, Tensor]]

N_NODES = 5
EDGES = np.array([[0, 1], [1, 2], [2, 0], [3, 4], [4, 3], [0, 3], [2, 4], [1, 1]])


def _param(rng: np.random.Generator, *shape: int, low: float = -1.0, high: float = 1.0) -> Tensor:
    return Tensor(rng.uniform(low, high, size=shape), requires_grad=True)


def _project(out: Tensor, weights: np.ndarray) -> Tensor:
    return Ops.sum(Ops.mul(out, weights))


def _binary(op: Callable[[Tensor, Tensor], Tensor]) -> Callable[[np.random.Generator], Case]:
    def build(rng: np.random.Generator) -> Case:
        a = _param(rng, 3, 4)
        b = _param(rng, 4, low=0.5, high=1.5)
        r = rng.normal(size=(3, 4))
        return (lambda: _project(op(a, b), r)), {"a": a, "b": b}

    return build


def _unary(
    op: Callable[[Tensor], Tensor], shape: Sequence[int] = (3, 4)
) -> Callable[[np.random.Generator], Case]:
    def build(rng: np.random.Generator) -> Case:
        x = _param(rng, *shape)
        r = rng.normal(size=op(Tensor(x.data)).shape)
        return (lambda: _project(op(x), r)), {"x": x}

    return build


def _matmul(rng: np.random.Generator) -> Case:
    a = _param(rng, 2, 3, 4)
    b = _param(rng, 4, 5)
    r = rng.normal(size=(2, 3, 5))
    return (lambda: _project(Ops.matmul(a, b), r)), {"a": a, "b": b}


def _concat(rng: np.random.Generator) -> Case:
    a = _param(rng, 2, 3)
    b = _param(rng, 2, 2)
    r = rng.normal(size=(2, 5))
    return (lambda: _project(Ops.concat([a, b], axis=1), r)), {"a": a, "b": b}


def _softmax(rng: np.random.Generator) -> Case:
    x = _param(rng, 2, 6, 6)
    mask = causal_mask(6)
    r = rng.normal(size=(2, 6, 6))
    return (lambda: _project(Ops.softmax(x, axis=-1, mask=mask), r)), {"x": x}


def _segment_softmax(rng: np.random.Generator) -> Case:
    x = _param(rng, 7, 2)
    seg = np.array([0, 0, 1, 1, 1, 3, 3])
    r = rng.normal(size=(7, 2))
    return (lambda: _project(Ops.segment_softmax(x, seg, 4), r)), {"x": x}


def _gather_scatter(rng: np.random.Generator) -> Case:
    x = _param(rng, 4, 3)
    index = np.array([0, 2, 2, 3, 1, 0])
    target = np.array([1, 0, 1, 2, 2, 0])
    r = rng.normal(size=(3, 3))
    return (lambda: _project(Ops.scatter_add(Ops.gather(x, index), target, 3), r)), {"x": x}


def _mse(rng: np.random.Generator) -> Case:
    x = _param(rng, 4, 5)
    y = rng.normal(size=(4, 5))
    mask = np.ones((4, 5), dtype=bool)
    mask[1] = False
    return (lambda: Ops.mse(x, y, mask)), {"x": x}


def _gat(combine: Combine) -> Callable[[np.random.Generator], Case]:
    def build(rng: np.random.Generator) -> Case:
        layer = GATConv(
            4, 3, rng, heads=2, combine=combine, edge_dim=DGraph.EDGE_DIM, edge_proj_dim=3
        )
        h = _param(rng, N_NODES, 4)
        attr = rng.uniform(0.0, 1.0, size=(len(EDGES), DGraph.EDGE_DIM))
        r = rng.normal(size=(N_NODES, layer.output_dim))
        params = {"h": h, **layer.parameters()}
        return (lambda: _project(layer(h, EDGES, attr, activate=False), r)), params

    return build


def _gcn(rng: np.random.Generator) -> Case:
    layer = GCNConv(4, 3, rng)
    h = _param(rng, N_NODES, 4)
    r = rng.normal(size=(N_NODES, 3))
    return (lambda: _project(layer(h, EDGES, activate=False), r)), {"h": h, **layer.parameters()}


def _sage(rng: np.random.Generator) -> Case:
    layer = SAGEConv(4, 3, rng)
    h = _param(rng, N_NODES, 4)
    r = rng.normal(size=(N_NODES, 3))
    return (lambda: _project(layer(h, EDGES, activate=False), r)), {"h": h, **layer.parameters()}


def _self_attention(rng: np.random.Generator) -> Case:
    layer = TemporalSelfAttention(6, rng, dim=3, heads=2, dropout=0.0)
    x = _param(rng, 3, 6)
    r = rng.normal(size=(3, 6))
    return (lambda: _project(layer(x), r)), {"x": x, **layer.parameters()}


def _decoder(rng: np.random.Generator) -> Case:
    layer = Linear(4, 6, rng)
    z = _param(rng, N_NODES, 4)
    r = rng.normal(size=(N_NODES, 6))
    return (lambda: _project(Ops.relu(layer(z)), r)), {"z": z, **layer.parameters()}


PRIMITIVES: Dict[str, Callable[[np.random.Generator], Case]] = {
    "add": _binary(Ops.add),
    "sub": _binary(Ops.sub),
    "mul": _binary(Ops.mul),
    "div": _binary(Ops.div),
    "matmul": _matmul,
    "concat": _concat,
    "transpose": _unary(lambda x: Ops.transpose(Ops.reshape(x, (2, 6)), (1, 0))),
    "slice": _unary(lambda x: Ops.slice_axis(x, 1, 3, axis=1)),
    "take": _unary(lambda x: Ops.take(x, (slice(None), [0, 2, 2]))),
    "sum": _unary(lambda x: Ops.sum(x, axis=0, keepdims=True)),
    "mean": _unary(lambda x: Ops.mean(x, axis=1)),
    "relu": _unary(Ops.relu),
    "leaky_relu": _unary(lambda x: Ops.leaky_relu(x, 0.2)),
    "softmax": _softmax,
    "segment_softmax": _segment_softmax,
    "gather_scatter": _gather_scatter,
    "mse": _mse,
}

LAYERS: Dict[str, Callable[[np.random.Generator], Case]] = {
    "gat_concat": _gat(Combine.CONCAT),
    "gat_average": _gat(Combine.AVERAGE),
    "gcn": _gcn,
    "sage": _sage,
    "self_attention": _self_attention,
    "decoder": _decoder,
}

CASES: Dict[str, Callable[[np.random.Generator], Case]] = {**PRIMITIVES, **LAYERS}


def run_gradcheck(
    seed: int = 0,
    h: float = DTrain.GRADCHECK_H,
    tol: float = DTrain.GRADCHECK_TOL,
    names: Optional[Sequence[str]] = None,
) -> List[GradCheckResult]:
    """
    Run the named cases, all of them by default, in CASES order.

    Raises:
        InvalidArgumentError: Unknown case name
    """
    selected = list(names) if names is not None else list(CASES)
    unknown = [n for n in selected if n not in CASES]
    if unknown:
        raise InvalidArgumentError(f"unknown gradcheck case(s): {', '.join(unknown)}")
    results = []
    for i, name in enumerate(selected):
        loss_fn, params = CASES[name](np.random.default_rng([seed, i]))
        results.append(check_gradients(name, loss_fn, params, h, tol))
    return results
