# wave_twin/graphs/GraphBatch.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from wave_twin.graphs.GraphTemplate import TemplateKind
from wave_twin.graphs.SimGraph import SimGraph
from wave_twin.utils.TwinErrors import ConfigError, InvalidArgumentError


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """
    Several graphs of one kind stacked into a single disconnected graph.

    Node rows of graph b occupy [b * N, (b + 1) * N); edge indices are offset
    accordingly.
    """

    kind: TemplateKind
    graphs: Sequence[SimGraph]
    x: np.ndarray
    y: np.ndarray
    edges: np.ndarray
    edge_attr: np.ndarray
    loss_mask: np.ndarray
    target_mask: np.ndarray
    dummy_mask: np.ndarray

    @property
    def size(self) -> int:
        return len(self.graphs)

    @property
    def nodes_per_graph(self) -> int:
        return self.graphs[0].n_nodes

    def split(self, values: np.ndarray) -> List[np.ndarray]:
        """Cut a stacked node array back into one array per graph."""
        return list(np.split(np.asarray(values), self.size, axis=0))

    @classmethod
    def collate(cls, graphs: Sequence[SimGraph]) -> "GraphBatch":
        """
        Raises:
            InvalidArgumentError: If no graph is given
            ConfigError: If graph kinds or windows differ
        """
        if not graphs:
            raise InvalidArgumentError("cannot batch zero graphs")
        kind, w = graphs[0].kind, graphs[0].w
        for g in graphs:
            if g.kind != kind or g.w != w:
                raise ConfigError(f"cannot batch {g.kind.value}/w={g.w} with {kind.value}/w={w}")
        n = graphs[0].n_nodes
        return cls(
            kind=kind,
            graphs=tuple(graphs),
            x=np.concatenate([g.x for g in graphs]),
            y=np.concatenate([g.y for g in graphs]),
            edges=np.concatenate([g.edges + b * n for b, g in enumerate(graphs)]),
            edge_attr=np.concatenate([g.edge_summary() for g in graphs]),
            loss_mask=np.concatenate([g.loss_mask() for g in graphs]),
            target_mask=np.concatenate([g.target_mask for g in graphs]),
            dummy_mask=np.concatenate([g.dummy_mask for g in graphs]),
        )
