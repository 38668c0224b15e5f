# wave_twin/mpnn/SelfAttention.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from typing import Optional

import numpy as np

from wave_twin.constants.DTwin import DTrain
from wave_twin.mpnn.Module import Module, glorot
from wave_twin.ndiff import Ops
from wave_twin.ndiff.Tensor import Tensor
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError


def causal_mask(w: int) -> np.ndarray:
    """
    Allowed (query, key) pairs: key strictly before query, plus (0, 0) so the
    first bucket has something to attend to.
    """
    mask = np.tril(np.ones((w, w), dtype=bool), k=-1)
    mask[0, 0] = True
    return mask


class TemporalSelfAttention(Module):
    """
    Masked scaled dot-product attention along each node's time axis.

    Each bucket of a node's waveform is one token. With projections on, the
    token's count is mapped to per-head query, key and value vectors of size
    `dim`; the heads are concatenated and mapped back to one value per bucket.
    Without projections the count itself serves as query, key and value. The
    result passes through dropout and is added to the input.

    Attributes:
        last_weights (Optional[np.ndarray]): nodes x heads x w x w attention
            weights of the latest forward pass
    """

    def __init__(
        self,
        w: int,
        rng: np.random.Generator,
        dim: int = DTrain.SA_DIM,
        heads: int = DTrain.SA_HEADS,
        dropout: float = DTrain.DROPOUT,
        causal: bool = True,
        projections: bool = True,
    ) -> None:
        super().__init__()
        if heads < 1 or dim < 1:
            raise InvalidArgumentError(
                f"attention needs heads >= 1 and dim >= 1, got {heads}, {dim}"
            )
        self.w = w
        self.dim = dim if projections else 1
        self.heads = heads if projections else 1
        self.dropout = dropout
        self.causal = causal
        self.projections = projections
        self.mask = causal_mask(w) if causal else np.ones((w, w), dtype=bool)
        if projections:
            width = self.heads * self.dim
            self.add_param("w_query", glorot(rng, 1, width, (1, width)))
            self.add_param("w_key", glorot(rng, 1, width, (1, width)))
            self.add_param("w_value", glorot(rng, 1, width, (1, width)))
            self.add_param("w_out", glorot(rng, width, 1, (width, 1)))
        self.last_weights: Optional[np.ndarray] = None

    def _split(self, t: Tensor, n: int) -> Tensor:
        # n x w x (heads*dim) -> n x heads x w x dim
        return Ops.transpose(Ops.reshape(t, (n, self.w, self.heads, self.dim)), (0, 2, 1, 3))

    def __call__(self, x: Tensor, rng: Optional[np.random.Generator] = None) -> Tensor:
        """
        Args:
            x (Tensor): nodes x w
            rng (Optional[np.random.Generator]): Dropout source in training

        Returns:
            Tensor: nodes x w
        """
        if x.ndim != 2 or x.shape[1] != self.w:
            raise ShapeError(
                f"self-attention expects nodes x {self.w}, got {x.shape}", x.shape, (-1, self.w)
            )
        n = x.shape[0]
        tokens = Ops.reshape(x, (n, self.w, 1))
        if self.projections:
            q = self._split(Ops.matmul(tokens, self.w_query), n)  # type: ignore[attr-defined]
            k = self._split(Ops.matmul(tokens, self.w_key), n)  # type: ignore[attr-defined]
            v = self._split(Ops.matmul(tokens, self.w_value), n)  # type: ignore[attr-defined]
        else:
            q = k = v = Ops.reshape(x, (n, 1, self.w, 1))
        scores = Ops.mul(
            Ops.matmul(q, Ops.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(self.dim)
        )
        weights = Ops.softmax(scores, axis=-1, mask=self.mask)
        self.last_weights = weights.data.copy()
        ctx = Ops.matmul(weights, v)
        if self.projections:
            merged = Ops.reshape(
                Ops.transpose(ctx, (0, 2, 1, 3)), (n, self.w, self.heads * self.dim)
            )
            out = Ops.reshape(
                Ops.matmul(merged, self.w_out), (n, self.w)  # type: ignore[attr-defined]
            )
        else:
            out = Ops.reshape(ctx, (n, self.w))
        out = Ops.dropout(out, self.dropout, self.training, rng)
        return Ops.add(x, out)
