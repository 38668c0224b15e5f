# wave_twin/graphs/GraphStore.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Graph datasets on disk.

A dataset is a JSON Lines file. The first line is a shape header (format,
version, kind, w, node count, edge count, edge feature dim); every following
line is one graph in SimGraph.to_dict() form, in record order.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from wave_twin.constants.DTwin import DGraph, DTwinErr
from wave_twin.core.SimRecord import SimulationRecord
from wave_twin.core.Topology import IntersectionTopology
from wave_twin.graphs.ExitGraph import build_exit_graph
from wave_twin.graphs.GraphTemplate import TemplateKind, load_template
from wave_twin.graphs.InflowGraph import build_inflow_graph
from wave_twin.graphs.SimGraph import SimGraph
from wave_twin.utils.TwinErrors import ConfigError, MappingError

FORMAT = "wave-twin-graphs"

BUILDERS = {
    TemplateKind.EXIT: build_exit_graph,
    TemplateKind.INFLOW: build_inflow_graph,
}


@dataclass(frozen=True)
class GraphHeader:
    kind: TemplateKind
    w: int
    nodes: int
    edges: int
    edge_dim: int
    bucket_seconds: int
    version: int = DGraph.DATASET_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": FORMAT,
            "version": self.version,
            "kind": TemplateKind(self.kind).value,
            "w": self.w,
            "nodes": self.nodes,
            "edges": self.edges,
            "edge_dim": self.edge_dim,
            "bucket_seconds": self.bucket_seconds,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GraphHeader":
        if data.get("format") != FORMAT:
            raise ConfigError(DTwinErr.CONFIG.format(detail="not a graph dataset"))
        if int(data.get("version", -1)) != DGraph.DATASET_VERSION:
            raise ConfigError(
                DTwinErr.CONFIG.format(detail=f"unsupported dataset version {data.get('version')}")
            )
        return cls(
            kind=TemplateKind(data["kind"]),
            w=int(data["w"]),
            nodes=int(data["nodes"]),
            edges=int(data["edges"]),
            edge_dim=int(data["edge_dim"]),
            bucket_seconds=int(data["bucket_seconds"]),
        )

    @classmethod
    def for_graph(cls, graph: SimGraph) -> "GraphHeader":
        return cls(
            kind=graph.kind,
            w=graph.w,
            nodes=graph.n_nodes,
            edges=graph.n_edges,
            edge_dim=graph.edge_dim,
            bucket_seconds=graph.bucket_seconds,
        )

    def summary(self) -> Dict[str, int]:
        return {"nodes": self.nodes, "edges": self.edges, "edge_dim": self.edge_dim}


def topology_index(topologies: Iterable[IntersectionTopology]) -> Dict[str, IntersectionTopology]:
    return {t.intersection_id: t for t in topologies}


def build_graphs(
    records: Iterable[SimulationRecord],
    topologies: Mapping[str, IntersectionTopology],
    kind: Union[TemplateKind, str],
) -> Iterator[SimGraph]:
    """
    Build one graph per record.

    Raises:
        MappingError: A record names an intersection with no known topology
    """
    builder = BUILDERS[TemplateKind(kind)]
    for record in records:
        topology = topologies.get(record.intersection_id)
        if topology is None:
            raise MappingError(
                f"no topology for intersection {record.intersection_id}",
                record.intersection_id,
            )
        yield builder(record, topology)


def write_graphs(graphs: Iterable[SimGraph], path: Union[str, Path]) -> Optional[GraphHeader]:
    """
    Write a graph dataset.

    Returns:
        Optional[GraphHeader]: The header written, or None when no graph came

    Raises:
        ConfigError: Graphs of different kinds or windows are mixed
    """
    header: Optional[GraphHeader] = None
    with open(path, "w", encoding="utf-8") as fh:
        for graph in graphs:
            this = GraphHeader.for_graph(graph)
            if header is None:
                header = this
                fh.write(json.dumps(header.to_dict()) + "\n")
            elif this != header:
                raise ConfigError(
                    DTwinErr.CONFIG.format(detail=f"mixed graph shapes {header} and {this}")
                )
            fh.write(json.dumps(graph.to_dict(), separators=(",", ":")) + "\n")
    return header


def read_graphs(
    path: Union[str, Path], limit: Optional[int] = None
) -> Tuple[GraphHeader, List[SimGraph]]:
    """
    Read a graph dataset and check every graph against its header.

    Raises:
        ConfigError: Missing or malformed header, or a graph that does not
            match it
    """
    graphs: List[SimGraph] = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise ConfigError(DTwinErr.CONFIG.format(detail=f"{path} has no header"))
        header = GraphHeader.from_dict(json.loads(first))
        template = load_template(header.kind)
        if (header.nodes, header.edges) != (template.n_nodes, template.n_edges):
            raise ConfigError(
                DTwinErr.CONFIG.format(detail=f"header {header} does not match the template")
            )
        for line in fh:
            if limit is not None and len(graphs) >= limit:
                break
            if not line.strip():
                continue
            graph = SimGraph.from_dict(json.loads(line))
            if GraphHeader.for_graph(graph) != header:
                raise ConfigError(
                    DTwinErr.CONFIG.format(
                        detail=f"graph {len(graphs)} does not match header {header}"
                    )
                )
            graphs.append(graph)
    return header, graphs

