# wave_twin/graphs/GraphTemplate.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Common adjacency templates for the exit and inflow simulation graphs.

Every intersection, whatever its lane layout, is mapped onto one of two fixed
graphs. The slot tables ship as versioned JSON next to this module so a real
corridor mapping can replace them without code changes.
"""

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from wave_twin.constants.DTwin import DGraph
from wave_twin.utils.TwinErrors import ConfigError

TEMPLATE_DIR = Path(__file__).parent / "templates"


class TemplateKind(str, Enum):
    EXIT = DGraph.EXIT
    INFLOW = DGraph.INFLOW


class TemplateNode(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    slot: int
    role: Literal["stp", "ext", "inf"]
    index: int
    group: str
    approach: Optional[str] = None
    movement: Optional[str] = None
    leg: Optional[str] = None
    layer: Optional[int] = None


class TemplateDoc(BaseModel):
    """
    On-disk form of a template table.
    """

    model_config = ConfigDict(extra="forbid")

    kind: TemplateKind
    version: int
    nodes: List[TemplateNode]
    edges: List[Tuple[int, int]]
    layers: Optional[List[str]] = None
    intra_edges: Optional[int] = None

    @model_validator(mode="after")
    def _check_slots(self) -> "TemplateDoc":
        n = len(self.nodes)
        if [node.slot for node in self.nodes] != list(range(n)):
            raise ValueError("template slots must be numbered 0..N-1 in order")
        for src, dst in self.edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"edge ({src}, {dst}) outside 0..{n - 1}")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("template holds duplicate edges")
        return self


@dataclass(frozen=True, eq=False)
class GraphTemplate:
    """
    A loaded, read-only template.

    Attributes:
        kind (TemplateKind): exit or inflow
        version (int): Table version
        nodes (Tuple[TemplateNode, ...]): One entry per slot
        edges (np.ndarray): M x 2 array of (source, destination) slots
        layers (Tuple[str, ...]): Approach per layer (inflow template only)
    """

    kind: TemplateKind
    version: int
    nodes: Tuple[TemplateNode, ...]
    edges: np.ndarray
    layers: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.edges.setflags(write=False)
        stp: Dict[Tuple[str, str, int], int] = {}
        ext: Dict[Tuple[str, int], int] = {}
        inf: Dict[Tuple[str, int], int] = {}
        for node in self.nodes:
            if node.role == "stp":
                stp[(node.approach, node.movement, node.index)] = node.slot
            elif node.role == "ext":
                ext[(node.leg, node.index)] = node.slot
            else:
                inf[(node.approach, node.index)] = node.slot
        object.__setattr__(self, "_stp", stp)
        object.__setattr__(self, "_ext", ext)
        object.__setattr__(self, "_inf", inf)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def target_role(self) -> str:
        return "ext" if self.kind == TemplateKind.EXIT else "inf"

    def target_mask(self) -> np.ndarray:
        return np.array([n.role == self.target_role for n in self.nodes], dtype=bool)

    def groups(self) -> Tuple[str, ...]:
        return tuple(n.group for n in self.nodes)

    def stp_slot(self, approach: str, movement: str, index: int) -> Optional[int]:
        return self._stp.get((approach, movement, index))  # type: ignore[attr-defined]

    def ext_slot(self, leg: str, index: int) -> Optional[int]:
        return self._ext.get((leg, index))  # type: ignore[attr-defined]

    def inf_slot(self, approach: str, index: int) -> Optional[int]:
        return self._inf.get((approach, index))  # type: ignore[attr-defined]

    def stp_capacity(self, approach: str, movement: str) -> int:
        return sum(
            1
            for n in self.nodes
            if n.role == "stp" and n.approach == approach and n.movement == movement
        )

    def ext_capacity(self, leg: str) -> int:
        return sum(1 for n in self.nodes if n.role == "ext" and n.leg == leg)

    def inf_capacity(self, approach: str) -> int:
        return sum(1 for n in self.nodes if n.role == "inf" and n.approach == approach)

    def successor(self, slot: int) -> Optional[int]:
        """Destination of the single exit-template edge leaving `slot`."""
        hits = np.flatnonzero(self.edges[:, 0] == slot)
        return int(self.edges[hits[0], 1]) if hits.size else None

    def pillar_mask(self) -> np.ndarray:
        """True for edges joining two different layers."""
        if self.kind != TemplateKind.INFLOW:
            return np.zeros(self.n_edges, dtype=bool)
        layer = np.array([n.layer for n in self.nodes])
        return layer[self.edges[:, 0]] != layer[self.edges[:, 1]]

    def edge_layer(self) -> np.ndarray:
        """Layer of each edge's source node (zeros for the exit template)."""
        if self.kind != TemplateKind.INFLOW:
            return np.zeros(self.n_edges, dtype=np.int64)
        layer = np.array([n.layer for n in self.nodes], dtype=np.int64)
        return layer[self.edges[:, 0]]

    def adjacency(self) -> List[Tuple[int, int]]:
        return [(int(s), int(d)) for s, d in self.edges]

    @classmethod
    def from_doc(cls, doc: TemplateDoc) -> "GraphTemplate":
        return cls(
            kind=doc.kind,
            version=doc.version,
            nodes=tuple(doc.nodes),
            edges=np.asarray(doc.edges, dtype=np.int64).reshape(-1, 2),
            layers=tuple(doc.layers or ()),
        )

    @classmethod
    def from_file(cls, path: Path) -> "GraphTemplate":
        try:
            doc = TemplateDoc.model_validate(json.loads(Path(path).read_text()))
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot load template {path}: {e}") from e
        return cls.from_doc(doc)


@lru_cache(maxsize=None)
def load_template(kind: TemplateKind) -> GraphTemplate:
    """
    Load one of the shipped templates (cached).

    Raises:
        ConfigError: If the shipped table does not have the expected size
    """
    kind = TemplateKind(kind)
    template = GraphTemplate.from_file(TEMPLATE_DIR / f"{kind.value}_template.json")
    want = (
        (DGraph.EXIT_NODES, DGraph.EXIT_EDGES)
        if kind == TemplateKind.EXIT
        else (DGraph.INF_NODES, DGraph.INF_EDGES)
    )
    if (template.n_nodes, template.n_edges) != want:
        raise ConfigError(
            f"{kind.value} template has {template.n_nodes} nodes and "
            f"{template.n_edges} edges, expected {want}"
        )
    return template
