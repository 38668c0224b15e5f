# wave_twin/graphs/InflowGraph.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import numpy as np

from wave_twin.core.SimRecord import SimulationRecord
from wave_twin.core.Topology import IntersectionTopology
from wave_twin.graphs.GraphTemplate import TemplateKind, load_template
from wave_twin.graphs.SimGraph import (
    GRAPH_TYPES,
    SimGraph,
    context_parts,
    place_waveforms,
    plan_summary,
)


class InflowGraph(SimGraph):
    """
    Four-layer bipartite graph, one layer per approach.

    Each layer holds 6 stop-bar and 3 inflow slots joined stop-bar to inflow;
    pillar edges link the same slot across layers. Inflow rows are the
    targets.
    """

    def pillar_mask(self) -> np.ndarray:
        return self.template.pillar_mask()

    def layer_rows(self, layer: int) -> np.ndarray:
        """Slots belonging to one approach layer."""
        return np.array([n.layer == layer for n in self.template.nodes], dtype=bool)


GRAPH_TYPES[TemplateKind.INFLOW] = InflowGraph


def build_inflow_graph(
    record: SimulationRecord, topology: IntersectionTopology
) -> InflowGraph:
    """
    Lay a record onto the inflow template.

    Returns:
        InflowGraph: 36 nodes, 180 edges (108 pillar), 29-dim edge features

    Raises:
        MappingError: A lane has no slot or no waveform
        CapacityError: The topology exceeds the template
        ShapeError: tmc, drv or sig has the wrong dimension
    """
    template = load_template(TemplateKind.INFLOW)
    mapping = topology.slot_map(TemplateKind.INFLOW)
    tmc, drv, sig = context_parts(record)
    y, lanes, dummy = place_waveforms(record, mapping, template, [record.stp, record.inf])
    return InflowGraph(
        kind=TemplateKind.INFLOW,
        intersection_id=record.intersection_id,
        y=y,
        tmc=tmc,
        drv=drv,
        sig=sig,
        dummy_mask=dummy,
        slot_lanes=lanes,
        plan=plan_summary(record),
        bucket_seconds=record.bucket_seconds,
        meta={"seed": record.meta.get("seed")},
    )
