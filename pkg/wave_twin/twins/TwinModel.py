# wave_twin/twins/TwinModel.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union

import numpy as np

from wave_twin.constants.DTwin import DModule
from wave_twin.graphs.GraphBatch import GraphBatch
from wave_twin.graphs.SimGraph import SimGraph
from wave_twin.mpnn.GATConv import Combine, GATConv
from wave_twin.mpnn.GCNConv import GCNConv
from wave_twin.mpnn.Module import Linear, Module
from wave_twin.mpnn.SAGEConv import SAGEConv
from wave_twin.mpnn.SelfAttention import TemporalSelfAttention
from wave_twin.ndiff import Ops
from wave_twin.ndiff.Tensor import Tensor, no_grad
from wave_twin.twins.TwinConfig import Encoder, TwinConfig
from wave_twin.utils.TwinErrors import ConfigError
from wave_twin.utils.TwinLog import TwinLog

BYTES_PER_PARAM = 4


@dataclass(frozen=True)
class Imputation:
    """
    Imputed target waveforms of one graph.

    Attributes:
        counts (Dict[str, np.ndarray]): Rounded, non-negative counts per
            physical target lane
        raw (np.ndarray): Raw reconstruction of every target slot, targets x w
        rows (np.ndarray): Template slots of the target rows
        dummy (np.ndarray): Dummy flag per target row
    """

    counts: Dict[str, np.ndarray]
    raw: np.ndarray
    rows: np.ndarray
    dummy: np.ndarray

    def dense_counts(self) -> np.ndarray:
        """Counts for every target slot, dummy slots zero."""
        out = np.rint(np.clip(self.raw, 0.0, None))
        out[self.dummy] = 0.0
        return out.astype(np.int64)


class TwinModel(Module):
    """
    Graph auto-encoder reconstructing a masked node matrix.

    Pipeline: input (targets zeroed) -> temporal self-attention (optional)
    -> Linear(w, z) + ReLU -> encoder layers -> Linear(z, w) + ReLU.

    Attributes:
        last_latents (Optional[np.ndarray]): Encoder output of the latest
            forward pass, stacked nodes x z
    """

    def __init__(self, config: TwinConfig, log: Optional[TwinLog] = None) -> None:
        super().__init__()
        self.config = config
        self.log = log or TwinLog(DModule.TWINS)
        rng = np.random.default_rng(config.seed)
        self.dropout_rng = np.random.default_rng([config.seed, 1])

        self.attention: Optional[TemporalSelfAttention] = None
        if config.use_self_attention:
            self.attention = TemporalSelfAttention(
                config.w,
                rng,
                dim=config.sa_dim,
                heads=config.sa_heads,
                dropout=config.dropout,
                projections=config.sa_projections,
            )
        self.pre = Linear(config.w, config.hidden, rng)
        self.encoders: List[Module] = []
        for i, layer in enumerate(self._build_encoder(rng)):
            setattr(self, f"encoder{i}", layer)
            self.encoders.append(layer)
        self.post = Linear(config.hidden, config.w, rng)
        self.last_latents: Optional[np.ndarray] = None

    def _build_encoder(self, rng: np.random.Generator) -> List[Module]:
        c = self.config
        if c.encoder == Encoder.GCN:
            return [GCNConv(c.hidden, c.hidden, rng)]
        if c.encoder == Encoder.SAGE:
            return [SAGEConv(c.hidden, c.hidden, rng)]

        def gat(in_dim: int, combine: Combine) -> GATConv:
            return GATConv(
                in_dim,
                c.hidden,
                rng,
                heads=c.gat_heads,
                combine=combine,
                edge_proj_dim=c.edge_proj_dim,
                leaky_slope=c.leaky_slope,
                strict=c.strict,
                log=self.log,
            )

        if c.layers == 1:
            return [gat(c.hidden, Combine.AVERAGE)]
        return [gat(c.hidden, Combine.CONCAT), gat(c.hidden * c.gat_heads, Combine.AVERAGE)]

    def _batch(self, data: Union[SimGraph, GraphBatch]) -> GraphBatch:
        batch = GraphBatch.collate([data]) if isinstance(data, SimGraph) else data
        if batch.kind != self.config.template:
            raise ConfigError(
                f"{self.config.kind.value} twin cannot take {batch.kind.value} graphs"
            )
        if batch.x.shape[1] != self.config.w:
            raise ConfigError(f"twin window is {self.config.w}, graphs have {batch.x.shape[1]}")
        return batch

    def forward(
        self, data: Union[SimGraph, GraphBatch], rng: Optional[np.random.Generator] = None
    ) -> Tensor:
        """
        Reconstruct the full node matrix from the masked input.

        Only the masked input matrix enters; true target rows never do.

        Returns:
            Tensor: stacked nodes x w
        """
        batch = self._batch(data)
        h = Tensor(batch.x)
        if self.attention is not None:
            h = self.attention(h, rng if rng is not None else self.dropout_rng)
        h = Ops.relu(self.pre(h))
        for layer in self.encoders:
            h = layer(h, batch.edges, batch.edge_attr)  # type: ignore[operator]
        self.last_latents = h.data.copy()
        return Ops.relu(self.post(h))

    __call__ = forward

    def loss(self, x_hat: Tensor, data: Union[SimGraph, GraphBatch]) -> Tensor:
        """
        MSE over every non-dummy entry, stop-bar and target rows alike.

        Raises:
            InvalidArgumentError: If every row is dummy
        """
        batch = self._batch(data)
        return Ops.mse(x_hat, Tensor(batch.y), batch.loss_mask)

    def reconstruct(self, graph: SimGraph) -> np.ndarray:
        """Forward pass in evaluation mode, as a plain array."""
        mode = self.training
        self.eval()
        try:
            with no_grad():
                return self.forward(graph).data.copy()
        finally:
            self.train(mode)

    def impute(self, graph: SimGraph) -> Imputation:
        """
        Imputed target waveforms: clamped at zero and rounded half to even.
        """
        x_hat = self.reconstruct(graph)
        rows = np.flatnonzero(graph.target_mask)
        dummy = graph.dummy_mask[rows]
        raw = x_hat[rows]
        counts = {
            graph.slot_lanes[slot]: np.rint(np.clip(raw[i], 0.0, None)).astype(np.int64)
            for i, slot in enumerate(rows)
            if not dummy[i]
        }
        return Imputation(counts=counts, raw=raw, rows=rows, dummy=dummy)  # type: ignore[arg-type]

    def summary(self) -> Dict[str, Any]:
        total = self.n_params()
        sa = self.attention.n_params() if self.attention is not None else 0
        encoder = sum(layer.n_params() for layer in self.encoders)
        edge = sum(layer.edge_params() for layer in self.encoders)  # type: ignore[attr-defined]
        out: Dict[str, Any] = {
            "variant": self.config.variant,
            "kind": self.config.kind.value,
            "encoder": self.config.encoder.value,
            "self_attention": self.config.use_self_attention,
            "hidden": self.config.hidden,
            "heads": self.config.gat_heads if self.config.encoder == Encoder.GAT else None,
            "layers": len(self.encoders),
            "total_params": total,
            "encoder_params": encoder,
            "edge_projection_params": edge,
            "size_mb": total * BYTES_PER_PARAM / 2**20,
        }
        if self.attention is not None:
            out["self_attention_params"] = sa
        return out


def make_variant(config: Union[TwinConfig, str], log: Optional[TwinLog] = None) -> TwinModel:
    """
    Build a twin from a configuration or a variant name.

    Raises:
        ConfigError: Unknown variant or unsupported combination
    """
    if isinstance(config, str):
        config = TwinConfig.for_variant(config)
    return TwinModel(config, log)
