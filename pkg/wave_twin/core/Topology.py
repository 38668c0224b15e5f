# wave_twin/core/Topology.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from wave_twin.constants.DTwin import (
    MOVEMENT_LEG,
    DApproach,
    DLeg,
    DMovement,
    DSim,
    DTwinErr,
)
from wave_twin.core.Traffic import TurningMovementCounts
from wave_twin.graphs.GraphTemplate import GraphTemplate, TemplateKind, load_template
from wave_twin.utils.TwinErrors import CapacityError, ConfigError, MappingError

TOPOLOGY_DIR = Path(__file__).parent / "topologies"
SHIPPED_TOPOLOGIES: Tuple[str, ...] = (
    "full",
    "t_intersection",
    "narrow_minor",
    "asymmetric",
)

MAJOR_APPROACHES = (DApproach.EB, DApproach.WB)
FIELD_TMC_MAJOR = (0.15, 0.75, 0.10)
FIELD_TMC_MINOR = (0.25, 0.55, 0.20)

ApproachName = Literal["NB", "SB", "EB", "WB"]
LegName = Literal["N", "S", "E", "W"]


class ApproachDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    left: int = Field(0, ge=0)
    through: int = Field(0, ge=0)
    right: int = Field(0, ge=0)
    inflow: int = Field(1, ge=0)
    tmc: Optional[Tuple[float, float, float]] = None

    def counts(self) -> Dict[str, int]:
        return {
            DMovement.LEFT: self.left,
            DMovement.THROUGH: self.through,
            DMovement.RIGHT: self.right,
        }

    @model_validator(mode="after")
    def _check(self) -> "ApproachDoc":
        if self.left + self.through + self.right > 0 and self.inflow == 0:
            raise ValueError("an approach with stop-bar lanes needs an inflow lane")
        return self


class TopologyDoc(BaseModel):
    """
    JSON document describing one intersection.

    Example:
        {"intersection_id": "x1",
         "approaches": {"EB": {"left": 1, "through": 2, "right": 1}},
         "outgoing": {"E": [0, 1], "N": [0], "S": [0]}}
    """

    model_config = ConfigDict(extra="forbid")

    intersection_id: str
    approaches: Dict[ApproachName, ApproachDoc]
    outgoing: Dict[LegName, List[int]] = Field(default_factory=dict)
    spacing_m: Optional[float] = Field(None, gt=0)
    base_rates: Dict[ApproachName, float] = Field(default_factory=dict)


@dataclass(frozen=True)
class Lane:
    """
    One physical detector lane.

    Incoming lanes carry approach and movement, outgoing lanes a departure
    leg, inflow lanes an approach.
    """

    lane_id: str
    role: str
    index: int
    approach: Optional[str] = None
    movement: Optional[str] = None
    leg: Optional[str] = None


def incoming_id(approach: str, movement: str, index: int) -> str:
    return f"{approach}_{movement}{index}"


def outgoing_id(leg: str, index: int) -> str:
    return f"OUT_{leg}{index}"


def inflow_id(approach: str, index: int) -> str:
    return f"INF_{approach}{index}"


@dataclass(frozen=True, eq=False)
class IntersectionTopology:
    """
    The lane layout of one intersection and its mapping onto the templates.

    Build instances with from_doc(), from_file() or shipped(); the document
    round-trips through to_doc().
    """

    doc: TopologyDoc

    @property
    def intersection_id(self) -> str:
        return self.doc.intersection_id

    @cached_property
    def approaches(self) -> Tuple[str, ...]:
        """Approaches with at least one stop-bar lane, in DApproach.ORDER."""
        return tuple(
            a
            for a in DApproach.ORDER
            if a in self.doc.approaches
            and sum(self.doc.approaches[a].counts().values()) > 0
        )

    @cached_property
    def incoming(self) -> Tuple[Lane, ...]:
        lanes: List[Lane] = []
        for a in DApproach.ORDER:
            if a not in self.doc.approaches:
                continue
            for m, count in self.doc.approaches[a].counts().items():
                for i in range(count):
                    lanes.append(
                        Lane(incoming_id(a, m, i), "stp", i, approach=a, movement=m)
                    )
        return tuple(lanes)

    @cached_property
    def outgoing(self) -> Tuple[Lane, ...]:
        lanes: List[Lane] = []
        for leg in DLeg.ORDER:
            for i in self.doc.outgoing.get(leg, []):  # type: ignore[call-overload]
                lanes.append(Lane(outgoing_id(leg, i), "ext", i, leg=leg))
        return tuple(lanes)

    @cached_property
    def inflow(self) -> Tuple[Lane, ...]:
        lanes: List[Lane] = []
        for a in DApproach.ORDER:
            if a in self.approaches:
                for i in range(self.doc.approaches[a].inflow):
                    lanes.append(Lane(inflow_id(a, i), "inf", i, approach=a))
        return tuple(lanes)

    def lanes_of(self, approach: str, movement: str) -> Tuple[Lane, ...]:
        return tuple(
            ln
            for ln in self.incoming
            if ln.approach == approach and ln.movement == movement
        )

    def inflow_of(self, approach: str) -> Tuple[Lane, ...]:
        return tuple(ln for ln in self.inflow if ln.approach == approach)

    def movements(self, approach: str) -> Tuple[str, ...]:
        return tuple(m for m in DMovement.ORDER if self.lanes_of(approach, m))

    def base_rate(self, approach: str) -> float:
        if approach not in self.approaches:
            return 0.0
        if approach in self.doc.base_rates:
            return float(self.doc.base_rates[approach])  # type: ignore[index]
        if approach in MAJOR_APPROACHES:
            return DSim.BASE_RATE_MAJOR
        return DSim.BASE_RATE_MINOR

    def field_tmc(self) -> TurningMovementCounts:
        """
        Field turning ratios: declared per approach, or the major/minor
        defaults renormalized over the movements that have lanes.
        """
        weights = np.zeros((4, 3))
        for r, a in enumerate(DApproach.ORDER):
            if a not in self.approaches:
                continue
            declared = self.doc.approaches[a].tmc  # type: ignore[index]
            if declared is not None:
                weights[r] = declared
            else:
                weights[r] = FIELD_TMC_MAJOR if a in MAJOR_APPROACHES else FIELD_TMC_MINOR
            for c, m in enumerate(DMovement.ORDER):
                if not self.lanes_of(a, m):
                    weights[r, c] = 0.0
        return TurningMovementCounts.from_list(
            TurningMovementCounts.normalized(weights).tolist()
        )

    def slot_map(self, kind: Union[TemplateKind, str]) -> Dict[str, int]:
        """
        Map every physical lane used by a template onto its slot.

        Exit templates hold incoming and outgoing lanes, inflow templates
        incoming and inflow lanes.

        Raises:
            CapacityError: An approach or leg has more lanes than slots
            MappingError: Two lanes share a slot, or an incoming lane's
                template edge leads to a missing outgoing lane
        """
        kind = TemplateKind(kind)
        cache = self.__dict__.setdefault("_slot_maps", {})
        if kind not in cache:
            cache[kind] = self._build_slot_map(load_template(kind))
        return dict(cache[kind])

    def _build_slot_map(self, template: GraphTemplate) -> Dict[str, int]:
        mapping: Dict[str, int] = {}
        taken: Dict[int, str] = {}

        def place(lane: Lane, slot: Optional[int]) -> None:
            if slot is None:
                raise MappingError(
                    DTwinErr.UNMAPPED.format(
                        lane_id=lane.lane_id, template=template.kind.value
                    ),
                    lane.lane_id,
                )
            if slot in taken:
                raise MappingError(
                    DTwinErr.SLOT.format(
                        lane_id=lane.lane_id,
                        slot=slot,
                        detail=f"already used by {taken[slot]}",
                    ),
                    lane.lane_id,
                )
            taken[slot] = lane.lane_id
            mapping[lane.lane_id] = slot

        self._check_capacity(template)
        for lane in self.incoming:
            place(lane, template.stp_slot(lane.approach, lane.movement, lane.index))
        if template.kind == TemplateKind.EXIT:
            for lane in self.outgoing:
                place(lane, template.ext_slot(lane.leg, lane.index))
            physical = set(mapping.values())
            for lane in self.incoming:
                dst = template.successor(mapping[lane.lane_id])
                if dst not in physical:
                    raise MappingError(
                        DTwinErr.SLOT.format(
                            lane_id=lane.lane_id,
                            slot=mapping[lane.lane_id],
                            detail=f"exit slot {dst} has no physical lane",
                        ),
                        lane.lane_id,
                    )
        else:
            for lane in self.inflow:
                place(lane, template.inf_slot(lane.approach, lane.index))
        return mapping

    def _check_capacity(self, template: GraphTemplate) -> None:
        for a, layout in self.doc.approaches.items():
            for m, count in layout.counts().items():
                cap = template.stp_capacity(a, m)
                if count > cap:
                    raise CapacityError(
                        DTwinErr.CAPACITY.format(
                            approach=a,
                            detail=f"{count} {m} lanes, {template.kind.value} "
                            f"template holds {cap}",
                        ),
                        a,
                    )
            if template.kind == TemplateKind.INFLOW:
                cap = template.inf_capacity(a)
                if layout.inflow > cap:
                    raise CapacityError(
                        DTwinErr.CAPACITY.format(
                            approach=a,
                            detail=f"{layout.inflow} inflow lanes, template holds {cap}",
                        ),
                        a,
                    )
        if template.kind == TemplateKind.EXIT:
            for leg, indices in self.doc.outgoing.items():
                cap = template.ext_capacity(leg)
                if len(indices) > cap:
                    raise CapacityError(
                        DTwinErr.CAPACITY.format(
                            approach=leg,
                            detail=f"{len(indices)} outgoing lanes, template holds {cap}",
                        ),
                        leg,
                    )

    def exit_lane_of(self) -> Dict[str, str]:
        """Outgoing lane reached by each incoming lane along its template edge."""
        template = load_template(TemplateKind.EXIT)
        mapping = self.slot_map(TemplateKind.EXIT)
        by_slot = {slot: lane_id for lane_id, slot in mapping.items()}
        return {
            lane.lane_id: by_slot[template.successor(mapping[lane.lane_id])]  # type: ignore[index]
            for lane in self.incoming
        }

    def departure_leg(self, approach: str, movement: str) -> str:
        return MOVEMENT_LEG[(approach, movement)]

    def to_doc(self) -> TopologyDoc:
        return self.doc.model_copy(deep=True)

    def to_json(self) -> str:
        return self.doc.model_dump_json(exclude_none=True, indent=2)

    @classmethod
    def from_doc(cls, doc: Union[TopologyDoc, dict]) -> "IntersectionTopology":
        if isinstance(doc, dict):
            try:
                doc = TopologyDoc.model_validate(doc)
            except ValidationError as e:
                raise ConfigError(DTwinErr.CONFIG.format(detail=e)) from e
        return cls(doc)

    @classmethod
    def from_json(cls, raw: str) -> "IntersectionTopology":
        try:
            return cls(TopologyDoc.model_validate_json(raw))
        except ValidationError as e:
            raise ConfigError(DTwinErr.CONFIG.format(detail=e)) from e

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "IntersectionTopology":
        return cls.from_json(Path(path).read_text())

    @classmethod
    def shipped(cls, name: str) -> "IntersectionTopology":
        if name not in SHIPPED_TOPOLOGIES:
            raise ConfigError(
                DTwinErr.CONFIG.format(detail=f"unknown topology {name}")
            )
        return cls.from_file(TOPOLOGY_DIR / f"{name}.json")

    @classmethod
    def resolve(cls, ref: str) -> "IntersectionTopology":
        """
        A shipped topology name or a path to a topology JSON file.

        Raises:
            FileNotFoundError: If ref is neither a shipped name nor a file
        """
        if ref in SHIPPED_TOPOLOGIES:
            return cls.shipped(ref)
        path = Path(ref)
        if not path.is_file():
            raise FileNotFoundError(ref)
        return cls.from_file(path)


def dummy_mask(
    topology: IntersectionTopology, template: Union[TemplateKind, str]
) -> np.ndarray:
    """
    Flag the template slots that hold no physical lane.

    Args:
        topology (IntersectionTopology): Intersection to map
        template (TemplateKind): exit or inflow

    Returns:
        np.ndarray: Boolean vector over template nodes, True for dummy slots

    Raises:
        CapacityError: If the topology exceeds the template's capacity
    """
    kind = TemplateKind(template)
    used = set(topology.slot_map(kind).values())
    n = load_template(kind).n_nodes
    return np.array([slot not in used for slot in range(n)], dtype=bool)


def lane_group(kind: Union[TemplateKind, str], slot: int) -> str:
    return load_template(TemplateKind(kind)).nodes[slot].group

