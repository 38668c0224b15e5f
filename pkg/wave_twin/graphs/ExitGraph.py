# wave_twin/graphs/ExitGraph.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

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


class ExitGraph(SimGraph):
    """
    Single-layer bipartite graph: 22 stop-bar slots feeding 11 exit slots.

    The exit rows are the imputation targets.
    """


GRAPH_TYPES[TemplateKind.EXIT] = ExitGraph


def build_exit_graph(
    record: SimulationRecord, topology: IntersectionTopology
) -> ExitGraph:
    """
    Lay a record onto the exit template.

    Args:
        record (SimulationRecord): Simulated waveforms of one scenario
        topology (IntersectionTopology): The record's intersection

    Returns:
        ExitGraph: 33 nodes, 22 edges, 29-dim edge features

    Raises:
        MappingError: A lane has no slot or no waveform
        CapacityError: The topology exceeds the template
        ShapeError: tmc, drv or sig has the wrong dimension
    """
    template = load_template(TemplateKind.EXIT)
    mapping = topology.slot_map(TemplateKind.EXIT)
    tmc, drv, sig = context_parts(record)
    y, lanes, dummy = place_waveforms(record, mapping, template, [record.stp, record.ext])
    return ExitGraph(
        kind=TemplateKind.EXIT,
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
