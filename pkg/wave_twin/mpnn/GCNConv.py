# wave_twin/mpnn/GCNConv.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from typing import Tuple

import numpy as np

from wave_twin.mpnn.GATConv import check_edges
from wave_twin.mpnn.Module import Linear, Module
from wave_twin.ndiff import Ops
from wave_twin.ndiff.Tensor import Tensor


def gcn_norm(edges: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Add one self-loop per node and weight every edge by 1 / sqrt(deg_i deg_j).

    Degrees count in-edges including the self-loop, so they are never zero.

    Returns:
        Sources, destinations and edge weights
    """
    loops = np.arange(n, dtype=np.int64)
    src = np.concatenate([edges[:, 0], loops])
    dst = np.concatenate([edges[:, 1], loops])
    deg = np.bincount(dst, minlength=n).astype(np.float64)
    inv = 1.0 / np.sqrt(deg)
    return src, dst, inv[src] * inv[dst]


class GCNConv(Module):
    """
    h'_i = ReLU(sum_j (1 / c_ij) W h_j + b) with self-loops and
    c_ij = sqrt(deg_i deg_j). Edge features are not used.
    """

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.lin = Linear(in_dim, out_dim, rng, bias=False)
        self.add_param("bias", np.zeros(out_dim))

    @property
    def output_dim(self) -> int:
        return self.out_dim

    def edge_params(self) -> int:
        return 0

    def __call__(  # type: ignore[no-untyped-def]
        self, h: Tensor, edges: np.ndarray, edge_attr=None, activate: bool = True
    ) -> Tensor:
        n = h.shape[0]
        src, dst, weight = gcn_norm(check_edges(edges, n, "gcn"), n)
        wh = self.lin(h)
        msg = Ops.mul(Ops.gather(wh, src), weight[:, None])
        out = Ops.add(Ops.scatter_add(msg, dst, n), self.bias)  # type: ignore[attr-defined]
        return Ops.relu(out) if activate else out
