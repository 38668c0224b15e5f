# wave_twin/core/SimRecord.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional, Union

from wave_twin.constants.DTwin import DTwin
from wave_twin.core.Topology import IntersectionTopology
from wave_twin.core.Traffic import DrivingBehavior, TurningMovementCounts
from wave_twin.core.Waveform import Waveform, WaveKind
from wave_twin.signal.SignalPlan import SignalTimingPlan
from wave_twin.signal.SignalSeries import SignalStateSeries
from wave_twin.utils.TwinErrors import InvalidArgumentError, MappingError

RECORD_KEYS = ("j", "sig", "tmc", "drv", "stp", "ext", "inf")


@dataclass(frozen=True, eq=False)
class SimulationRecord:
    """
    The parsed result of one simulation run at one intersection.

    Attributes:
        intersection_id (str): The intersection j
        plan (SignalTimingPlan): Plan the series was rendered from
        sig (SignalStateSeries): 8 x w green indicator
        tmc (TurningMovementCounts): Turning ratios of the demand
        drv (DrivingBehavior): Driving behavior of the run
        stp (Dict[str, Waveform]): Stop-bar waveforms per incoming lane
        ext (Dict[str, Waveform]): Exit waveforms per outgoing lane
        inf (Dict[str, Waveform]): Inflow waveforms per feeding lane
        meta (Dict[str, Any]): Seed, warnings, totals and diagnostics
    """

    intersection_id: str
    plan: SignalTimingPlan
    sig: SignalStateSeries
    tmc: TurningMovementCounts
    drv: DrivingBehavior
    stp: Mapping[str, Waveform]
    ext: Mapping[str, Waveform]
    inf: Mapping[str, Waveform]
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        shapes = {
            (wf.w, wf.bucket_seconds)
            for group in (self.stp, self.ext, self.inf)
            for wf in group.values()
        }
        shapes.add((self.sig.w, self.sig.bucket_seconds))
        if len(shapes) != 1:
            raise InvalidArgumentError(
                f"record {self.intersection_id} mixes window shapes {sorted(shapes)}"
            )
        for group, kind in (
            (self.stp, WaveKind.STOPBAR),
            (self.ext, WaveKind.EXIT),
            (self.inf, WaveKind.INFLOW),
        ):
            for lane_id, wf in group.items():
                if wf.kind != kind or wf.lane_id != lane_id:
                    raise InvalidArgumentError(
                        f"waveform {wf.lane_id} filed under {kind.value}/{lane_id}"
                    )

    @property
    def w(self) -> int:
        return self.sig.w

    @property
    def bucket_seconds(self) -> int:
        return self.sig.bucket_seconds

    @property
    def warnings(self) -> list:
        return list(self.meta.get("warnings", []))

    def check_topology(self, topology: IntersectionTopology) -> None:
        """
        Verify the record holds exactly the lanes the topology declares.

        Raises:
            MappingError: Naming the first missing or undeclared lane
        """
        for group, lanes in (
            (self.stp, topology.incoming),
            (self.ext, topology.outgoing),
            (self.inf, topology.inflow),
        ):
            declared = {ln.lane_id for ln in lanes}
            for lane_id in group:
                if lane_id not in declared:
                    raise MappingError(
                        f"lane {lane_id} is not declared by topology "
                        f"{topology.intersection_id}",
                        lane_id,
                    )
            for lane_id in sorted(declared - set(group)):
                raise MappingError(f"record lacks a waveform for lane {lane_id}", lane_id)

    def to_dict(self) -> Dict[str, Any]:
        def waves(group: Mapping[str, Waveform]) -> Dict[str, list]:
            return {k: list(wf.buckets) for k, wf in group.items()}

        return {
            "j": self.intersection_id,
            "sig": {
                "plan": self.plan.to_dict(),
                "bucket_seconds": self.sig.bucket_seconds,
                "series": self.sig.to_list(),
            },
            "tmc": self.tmc.to_list(),
            "drv": self.drv.to_dict(),
            "stp": waves(self.stp),
            "ext": waves(self.ext),
            "inf": waves(self.inf),
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimulationRecord":
        missing = [k for k in RECORD_KEYS if k not in data]
        if missing:
            raise InvalidArgumentError(f"record lacks keys {missing}")
        sig = data["sig"]
        bs = int(sig.get("bucket_seconds", DTwin.BUCKET_SECONDS))

        def waves(raw: Dict[str, list], kind: WaveKind) -> Dict[str, Waveform]:
            return {k: Waveform(k, kind, tuple(v), bs) for k, v in raw.items()}

        return cls(
            intersection_id=data["j"],
            plan=SignalTimingPlan.from_dict(sig["plan"]),
            sig=SignalStateSeries.from_list(sig["series"], bs),
            tmc=TurningMovementCounts.from_list(data["tmc"]),
            drv=DrivingBehavior.from_dict(data["drv"]),
            stp=waves(data["stp"], WaveKind.STOPBAR),
            ext=waves(data["ext"], WaveKind.EXIT),
            inf=waves(data["inf"], WaveKind.INFLOW),
            meta=dict(data.get("meta", {})),
        )

    @classmethod
    def from_json(cls, raw: str) -> "SimulationRecord":
        return cls.from_dict(json.loads(raw))


def write_records(
    records: Iterable[SimulationRecord], path: Union[str, Path]
) -> int:
    """Write records as JSON Lines; returns the number written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json())
            fh.write("\n")
            n += 1
    return n


def read_records(
    path: Union[str, Path], limit: Optional[int] = None
) -> Iterator[SimulationRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if limit is not None and i >= limit:
                return
            if line.strip():
                yield SimulationRecord.from_json(line)
