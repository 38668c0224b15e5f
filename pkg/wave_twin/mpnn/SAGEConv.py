# wave_twin/mpnn/SAGEConv.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import numpy as np

from wave_twin.mpnn.GATConv import check_edges
from wave_twin.mpnn.Module import Linear, Module
from wave_twin.ndiff import Ops
from wave_twin.ndiff.Tensor import Tensor


class SAGEConv(Module):
    """
    h'_i = ReLU(W1 h_i + W2 mean_{j in N(i)} h_j).

    Full neighborhoods, no sampling. The mean term is zero for a node with no
    in-edges.
    """

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.lin_self = Linear(in_dim, out_dim, rng, bias=True)
        self.lin_neigh = Linear(in_dim, out_dim, rng, bias=False)

    @property
    def output_dim(self) -> int:
        return self.out_dim

    def edge_params(self) -> int:
        return 0

    def __call__(  # type: ignore[no-untyped-def]
        self, h: Tensor, edges: np.ndarray, edge_attr=None, activate: bool = True
    ) -> Tensor:
        n = h.shape[0]
        edges = check_edges(edges, n, "sage")
        src, dst = edges[:, 0], edges[:, 1]
        deg = np.bincount(dst, minlength=n).astype(np.float64)
        inv = np.divide(1.0, deg, out=np.zeros(n), where=deg > 0)
        neigh = Ops.mul(Ops.scatter_add(Ops.gather(h, src), dst, n), inv[:, None])
        out = Ops.add(self.lin_self(h), self.lin_neigh(neigh))
        return Ops.relu(out) if activate else out
