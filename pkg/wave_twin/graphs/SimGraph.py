# wave_twin/graphs/SimGraph.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Template-conformant simulation graphs.

A SimGraph keeps the true node matrix, the scenario context (turning ratios,
driving behavior, signal series) and the dummy mask. Everything a model sees
is derived from those: the masked input matrix, the target mask and the
M x 29 x w edge-feature tensor.
"""

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from wave_twin.constants.DTwin import DApproach, DDrv, DGraph, DMovement, DSignal, DTwin, DTwinErr
from wave_twin.core.SimRecord import SimulationRecord
from wave_twin.core.Waveform import Waveform
from wave_twin.graphs.GraphTemplate import GraphTemplate, TemplateKind, load_template
from wave_twin.utils.TwinErrors import InvalidArgumentError, MappingError, ShapeError

STATIC_DIM = DGraph.TMC_DIM + DGraph.DRV_DIM
CONTEXT_NAMES: Tuple[str, ...] = (
    tuple(f"tmc_{a}_{m}" for a in DApproach.ORDER for m in DMovement.ORDER)
    + tuple(f"drv_{n}" for n in DDrv.FIELDS)
    + ("cycle", "barrier")
    + tuple(f"green_{p}" for p in range(1, DSignal.N_PHASES + 1))
)


def _frozen(arr: Any, dtype: Any) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SimGraph:
    """
    One simulation record laid out on a graph template.

    Attributes:
        kind (TemplateKind): exit or inflow
        intersection_id (str): Intersection the record came from
        y (np.ndarray): N x w true counts; dummy rows are zero
        tmc (np.ndarray): 4 x 3 turning ratios
        drv (np.ndarray): 9 driving-behavior values
        sig (np.ndarray): 8 x w signal state series
        dummy_mask (np.ndarray): N booleans, True where no physical lane sits
        slot_lanes (Tuple[Optional[str], ...]): Physical lane id per slot
        plan (np.ndarray): cycle, barrier and the 8 green fractions
        bucket_seconds (int): Width of one bucket
        meta (Dict[str, Any]): Seed and other pass-through record metadata
    """

    kind: TemplateKind
    intersection_id: str
    y: np.ndarray
    tmc: np.ndarray
    drv: np.ndarray
    sig: np.ndarray
    dummy_mask: np.ndarray
    slot_lanes: Tuple[Optional[str], ...]
    plan: np.ndarray
    bucket_seconds: int = DTwin.BUCKET_SECONDS
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TemplateKind(self.kind))
        object.__setattr__(self, "y", _frozen(self.y, np.float64))
        object.__setattr__(self, "tmc", _frozen(self.tmc, np.float64))
        object.__setattr__(self, "drv", _frozen(self.drv, np.float64))
        object.__setattr__(self, "sig", _frozen(self.sig, np.float64))
        object.__setattr__(self, "dummy_mask", _frozen(self.dummy_mask, bool))
        object.__setattr__(self, "plan", _frozen(self.plan, np.float64))
        object.__setattr__(self, "slot_lanes", tuple(self.slot_lanes))
        n, w = self.template.n_nodes, self.y.shape[-1]
        for name, arr, want in (
            ("y", self.y, (n, w)),
            ("tmc", self.tmc, (4, 3)),
            ("drv", self.drv, (DGraph.DRV_DIM,)),
            ("sig", self.sig, (DGraph.SIG_DIM, w)),
            ("dummy_mask", self.dummy_mask, (n,)),
            ("plan", self.plan, (2 + DSignal.N_PHASES,)),
        ):
            if arr.shape != want:
                raise ShapeError(
                    DTwinErr.SHAPE.format(op=f"graph {name}", a=arr.shape, b=want),
                    arr.shape,
                    want,
                )
        if len(self.slot_lanes) != n:
            raise ShapeError(
                DTwinErr.SHAPE.format(op="graph slots", a=(len(self.slot_lanes),), b=(n,)),
                (len(self.slot_lanes),),
                (n,),
            )
        if np.any(self.y[self.dummy_mask] != 0):
            raise InvalidArgumentError("dummy slots must carry all-zero targets")

    @cached_property
    def template(self) -> GraphTemplate:
        return load_template(self.kind)

    @property
    def n_nodes(self) -> int:
        return self.template.n_nodes

    @property
    def n_edges(self) -> int:
        return self.template.n_edges

    @property
    def w(self) -> int:
        return int(self.y.shape[1])

    @property
    def edge_dim(self) -> int:
        return STATIC_DIM + DGraph.SIG_DIM

    @property
    def edges(self) -> np.ndarray:
        return self.template.edges

    @cached_property
    def target_mask(self) -> np.ndarray:
        return _frozen(self.template.target_mask(), bool)

    @cached_property
    def x(self) -> np.ndarray:
        """Model input: the true matrix with every target row zeroed."""
        out = self.y.copy()
        out[self.target_mask] = 0.0
        return _frozen(out, np.float64)

    @cached_property
    def edge_active(self) -> np.ndarray:
        """Edges whose two endpoints are both physical lanes."""
        e = self.edges
        return _frozen(~(self.dummy_mask[e[:, 0]] | self.dummy_mask[e[:, 1]]), bool)

    @cached_property
    def edge_static(self) -> np.ndarray:
        """
        Per-edge turning ratios and driving behavior (M x 21).

        Inflow edges see the ratios rotated so the source layer's approach row
        comes first. Edges touching a dummy slot carry zeros.
        """
        m = self.n_edges
        out = np.zeros((m, STATIC_DIM))
        if self.kind == TemplateKind.EXIT:
            out[:, : DGraph.TMC_DIM] = self.tmc.reshape(-1)
        else:
            layers = self.template.edge_layer()
            for layer, approach in enumerate(self.template.layers):
                shift = DApproach.ORDER.index(approach)
                rows = np.roll(self.tmc, -shift, axis=0).reshape(-1)
                out[layers == layer, : DGraph.TMC_DIM] = rows
        out[:, DGraph.TMC_DIM :] = self.drv
        out[~self.edge_active] = 0.0
        return _frozen(out, np.float64)

    @cached_property
    def z(self) -> np.ndarray:
        """Edge features, M x 29 x w: static part broadcast, signal column per bucket."""
        m, w = self.n_edges, self.w
        out = np.empty((m, self.edge_dim, w))
        out[:, :STATIC_DIM, :] = self.edge_static[:, :, None]
        out[:, STATIC_DIM:, :] = self.sig[None, :, :]
        out[~self.edge_active] = 0.0
        return _frozen(out, np.float64)

    def edge_summary(self) -> np.ndarray:
        """Bucket mean of z, M x 29."""
        out = np.concatenate(
            [
                self.edge_static,
                np.broadcast_to(self.sig.mean(axis=1), (self.n_edges, DGraph.SIG_DIM)),
            ],
            axis=1,
        )
        out[~self.edge_active] = 0.0
        return out

    def loss_mask(self) -> np.ndarray:
        """N x w, True on every non-dummy entry."""
        return np.repeat(~self.dummy_mask[:, None], self.w, axis=1)

    def metric_rows(self) -> np.ndarray:
        """Target rows that hold a physical lane."""
        return self.target_mask & ~self.dummy_mask

    def context(self) -> np.ndarray:
        """Scenario descriptors in CONTEXT_NAMES order."""
        return np.concatenate([self.tmc.reshape(-1), self.drv, self.plan])

    def groups(self) -> Tuple[str, ...]:
        return self.template.groups()

    def canonical_hash(self) -> str:
        """
        Digest invariant to node relabeling.

        Nodes are described by role, dummy flag and rounded rows of y; edges
        by the descriptions of their endpoints and their bucket-mean features.
        Both collections are sorted before hashing.
        """

        def digest(*parts: bytes) -> str:
            h = hashlib.sha256()
            for part in parts:
                h.update(part)
            return h.hexdigest()

        roles = [n.role for n in self.template.nodes]
        y = np.round(self.y, 9)
        node = [
            digest(roles[i].encode(), bytes([int(self.dummy_mask[i])]), y[i].tobytes())
            for i in range(self.n_nodes)
        ]
        summary = np.round(self.edge_summary(), 9)
        edge = sorted(
            node[s] + node[d] + digest(summary[k].tobytes())
            for k, (s, d) in enumerate(self.edges)
        )
        return digest(
            self.kind.value.encode(),
            "".join(sorted(node)).encode(),
            "".join(edge).encode(),
            np.round(self.sig, 9).tobytes(),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "j": self.intersection_id,
            "y": self.y.astype(np.int64).tolist()
            if np.array_equal(self.y, np.rint(self.y))
            else self.y.tolist(),
            "tmc": self.tmc.tolist(),
            "drv": self.drv.tolist(),
            "sig": self.sig.astype(np.int64).tolist(),
            "dummy": [int(v) for v in self.dummy_mask],
            "lanes": list(self.slot_lanes),
            "plan": self.plan.tolist(),
            "bucket_seconds": self.bucket_seconds,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimGraph":
        kind = TemplateKind(data["kind"])
        target = GRAPH_TYPES.get(kind, cls)
        return target(
            kind=kind,
            intersection_id=data["j"],
            y=np.asarray(data["y"], dtype=np.float64),
            tmc=np.asarray(data["tmc"], dtype=np.float64),
            drv=np.asarray(data["drv"], dtype=np.float64),
            sig=np.asarray(data["sig"], dtype=np.float64),
            dummy_mask=np.asarray(data["dummy"], dtype=bool),
            slot_lanes=tuple(data["lanes"]),
            plan=np.asarray(data["plan"], dtype=np.float64),
            bucket_seconds=int(data.get("bucket_seconds", DTwin.BUCKET_SECONDS)),
            meta=dict(data.get("meta", {})),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimGraph):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.intersection_id == other.intersection_id
            and self.slot_lanes == other.slot_lanes
            and self.bucket_seconds == other.bucket_seconds
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("y", "tmc", "drv", "sig", "dummy_mask", "plan")
            )
        )


# Filled in by the ExitGraph and InflowGraph modules
GRAPH_TYPES: Dict[TemplateKind, type] = {}


def plan_summary(record: SimulationRecord) -> np.ndarray:
    plan = record.plan
    return np.array(
        [float(plan.cycle_length_s), float(plan.barrier_time_s)]
        + [plan.green_fraction(p) for p in range(1, DSignal.N_PHASES + 1)]
    )


def place_waveforms(
    record: SimulationRecord,
    mapping: Dict[str, int],
    template: GraphTemplate,
    groups: List[Mapping[str, Waveform]],
) -> Tuple[np.ndarray, Tuple[Optional[str], ...], np.ndarray]:
    """
    Lay the record's waveforms into template rows.

    Returns:
        The N x w true matrix, the lane id per slot and the dummy mask

    Raises:
        MappingError: A waveform belongs to a lane with no slot, or a mapped
            lane has no waveform
    """
    y = np.zeros((template.n_nodes, record.w))
    lanes: List[Optional[str]] = [None] * template.n_nodes
    for group in groups:
        for lane_id, wf in group.items():
            slot = mapping.get(lane_id)
            if slot is None:
                raise MappingError(
                    DTwinErr.UNMAPPED.format(lane_id=lane_id, template=template.kind.value),
                    lane_id,
                )
            wf.check_window(record.w)
            y[slot] = wf.as_array()
            lanes[slot] = lane_id
    placed = {lane for lane in lanes if lane is not None}
    for lane_id in sorted(set(mapping) - placed):
        raise MappingError(f"record lacks a waveform for lane {lane_id}", lane_id)
    dummy = np.array([lane is None for lane in lanes], dtype=bool)
    return y, tuple(lanes), dummy


def context_parts(record: SimulationRecord) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Turning ratios, driving behavior and signal series of a record.

    Raises:
        ShapeError: If any component has the wrong dimension
    """
    tmc = record.tmc.matrix()
    drv = record.drv.vector()
    sig = np.asarray(record.sig.green, dtype=np.float64)
    for name, got, want in (
        ("tmc", tmc.size, DGraph.TMC_DIM),
        ("drv", drv.size, DGraph.DRV_DIM),
        ("sig", sig.shape[0], DGraph.SIG_DIM),
    ):
        if got != want:
            raise ShapeError(
                DTwinErr.SHAPE.format(op=name, a=(got,), b=(want,)), (got,), (want,)
            )
    return tmc, drv, sig
