# wave_twin/mpnn/GATConv.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Graph attention with edge features.

For destination i and source j, per head k:

    e_ij = act(a_k . [W_k h_i || W_k h_j || W_e z_ij])
    alpha_ij = softmax of e_ij over the in-edges of i
    h'_i = sum_j alpha_ij W_k h_j

The score activation is ReLU unless a LeakyReLU slope is configured. Heads
are concatenated or averaged, then the output ReLU is applied. A node with
no in-edges receives its own projection W_k h_i instead of an empty sum.
"""

from enum import Enum
from typing import Optional

import numpy as np

from wave_twin.constants.DTwin import DGraph, DModule, DTrain, DTwinMsgText
from wave_twin.mpnn.Module import Module, glorot
from wave_twin.ndiff import Ops
from wave_twin.ndiff.Tensor import Tensor
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError
from wave_twin.utils.TwinLog import TwinLog


class Combine(str, Enum):
    CONCAT = "concat"
    AVERAGE = "average"


def check_edges(edges: np.ndarray, n: int, op: str) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ShapeError(f"{op}: edge index outside 0..{n - 1}", edges.shape, (n,))
    return edges


class GATConv(Module):
    """
    Multi-head graph attention layer.

    Attributes:
        last_alpha (Optional[np.ndarray]): M x heads attention weights of the
            latest forward pass
        last_isolated (int): Nodes without in-edges in the latest pass
    """

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        heads: int = DTrain.HEADS,
        combine: Combine = Combine.AVERAGE,
        edge_dim: Optional[int] = DGraph.EDGE_DIM,
        edge_proj_dim: int = DTrain.EDGE_PROJ_DIM,
        leaky_slope: Optional[float] = None,
        strict: bool = False,
        log: Optional[TwinLog] = None,
    ) -> None:
        super().__init__()
        if heads < 1:
            raise InvalidArgumentError(f"heads must be at least 1, got {heads}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.heads = heads
        self.combine = Combine(combine)
        self.leaky_slope = leaky_slope
        self.strict = strict
        self.log = log or TwinLog(DModule.MPNN)
        self.edge_dim = edge_dim or 0
        self.edge_proj_dim = edge_proj_dim if self.edge_dim else 0

        self.add_param("weight", glorot(rng, in_dim, out_dim, (in_dim, heads * out_dim)))
        self.add_param("att_dst", glorot(rng, out_dim, 1, (heads, out_dim)))
        self.add_param("att_src", glorot(rng, out_dim, 1, (heads, out_dim)))
        if self.edge_dim:
            self.add_param(
                "edge_weight",
                glorot(rng, self.edge_dim, self.edge_proj_dim, (self.edge_dim, self.edge_proj_dim)),
            )
            self.add_param(
                "att_edge", glorot(rng, self.edge_proj_dim, 1, (self.edge_proj_dim, heads))
            )
        width = heads * out_dim if self.combine == Combine.CONCAT else out_dim
        self.add_param("bias", np.zeros(width))

        self.last_alpha: Optional[np.ndarray] = None
        self.last_isolated = 0

    @property
    def output_dim(self) -> int:
        return self.heads * self.out_dim if self.combine == Combine.CONCAT else self.out_dim

    def edge_params(self) -> int:
        if not self.edge_dim:
            return 0
        return self.edge_weight.size + self.att_edge.size  # type: ignore[attr-defined]

    def __call__(
        self,
        h: Tensor,
        edges: np.ndarray,
        edge_attr: Optional[np.ndarray] = None,
        activate: bool = True,
    ) -> Tensor:
        """
        Args:
            h (Tensor): N x in_dim node features
            edges (np.ndarray): M x 2 (source, destination) pairs
            edge_attr (Optional[np.ndarray]): M x edge_dim edge features
            activate (bool): Apply the output ReLU

        Returns:
            Tensor: N x output_dim
        """
        n = h.shape[0]
        edges = check_edges(edges, n, "gat")
        src, dst = edges[:, 0], edges[:, 1]
        H, D = self.heads, self.out_dim

        wh = Ops.reshape(Ops.matmul(h, self.weight), (n, H, D))  # type: ignore[attr-defined]
        s_dst = Ops.sum(Ops.mul(wh, self.att_dst), axis=-1)  # type: ignore[attr-defined]
        s_src = Ops.sum(Ops.mul(wh, self.att_src), axis=-1)  # type: ignore[attr-defined]
        score = Ops.add(Ops.gather(s_dst, dst), Ops.gather(s_src, src))
        if self.edge_dim:
            if edge_attr is None or np.shape(edge_attr) != (len(edges), self.edge_dim):
                raise ShapeError(
                    f"gat: edge features must be {len(edges)} x {self.edge_dim}",
                    np.shape(edge_attr),
                    (len(edges), self.edge_dim),
                )
            ze = Ops.matmul(Tensor(edge_attr), self.edge_weight)  # type: ignore[attr-defined]
            score = Ops.add(score, Ops.matmul(ze, self.att_edge))  # type: ignore[attr-defined]
        if self.leaky_slope is None:
            score = Ops.relu(score)
        else:
            score = Ops.leaky_relu(score, self.leaky_slope)
        alpha = Ops.segment_softmax(score, dst, n)
        self.last_alpha = alpha.data.copy()

        msg = Ops.mul(Ops.gather(wh, src), Ops.reshape(alpha, (len(edges), H, 1)))
        agg = Ops.scatter_add(msg, dst, n)

        isolated = np.bincount(dst, minlength=n) == 0
        self.last_isolated = int(isolated.sum())
        if self.last_isolated:
            if self.strict:
                self.log.warning(DTwinMsgText.ISOLATED.format(count=self.last_isolated))
            agg = Ops.add(agg, Ops.mul(wh, isolated.astype(np.float64)[:, None, None]))

        if self.combine == Combine.CONCAT:
            out = Ops.reshape(agg, (n, H * D))
        else:
            out = Ops.mean(agg, axis=1)
        out = Ops.add(out, self.bias)  # type: ignore[attr-defined]
        return Ops.relu(out) if activate else out
