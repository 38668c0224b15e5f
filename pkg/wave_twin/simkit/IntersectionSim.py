# wave_twin/simkit/IntersectionSim.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Mesoscopic single-intersection simulator.

A per-second engine: Poisson arrivals cross the inflow detector, travel to
the stop-bar with a dispersed travel time, queue FIFO per lane, discharge at
the saturation headway while their governing phase is green and cross the
exit detector of the outgoing lane their template edge leads to. Detector
events inside the recorded window are bucketed and clipped at saturation.
"""

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import poisson, truncnorm

from wave_twin.constants.DTwin import (
    PHASE_OF,
    DApproach,
    DDrv,
    DModule,
    DMovement,
    DSim,
    DTwin,
    DTwinMsgText,
)
from wave_twin.core.SimRecord import SimulationRecord
from wave_twin.core.Topology import IntersectionTopology, Lane
from wave_twin.core.Traffic import DrivingBehavior
from wave_twin.core.Waveform import SaturationCounter, Waveform, WaveKind, clip_saturation
from wave_twin.signal.SignalPlan import SignalTimingPlan
from wave_twin.signal.SignalSeries import render_series
from wave_twin.simkit.Demand import DemandScenario, LaneGeometry
from wave_twin.utils.TwinLog import TwinLog

# Stream keys for per-vehicle random draws
_ARRIVAL_STREAM = 0
_VEHICLE_STREAM = 1


@dataclass
class Vehicle:
    vid: int
    approach: str
    movement: str
    t_inflow: int
    inflow_lane: str
    lane: str
    t_queue: int
    exit_lane: str
    t_stop: Optional[int] = None
    t_exit: Optional[int] = None

    @property
    def stream(self) -> str:
        return f"{self.approach}_{self.movement}"


def saturation_headway(drv: DrivingBehavior) -> float:
    """Seconds between discharges of a standing queue."""
    return max(DSim.MIN_HEADWAY_S, drv.tau + drv.min_gap / DSim.DISCHARGE_SPEED_MS)


def startup_loss(drv: DrivingBehavior) -> float:
    """Lost time at green onset; shorter for brisk acceleration and cooperative drivers."""
    return DSim.STARTUP_BASE_S * DSim.REF_ACCEL / drv.accel + (1.0 - drv.lc_cooperative)


def reassign_probability(drv: DrivingBehavior) -> float:
    """Chance a driver ignores the shortest queue when picking a lane."""
    return min(0.5, 0.1 * drv.lc_speed_gain + 0.05 * drv.lc_strategic)


def dispersion_sd(travel_s: float, drv: DrivingBehavior) -> float:
    return 0.1 * drv.sigma * travel_s + 0.25 * drv.tau


class IntersectionSim:
    """
    Simulates one intersection under one plan and demand scenario.

    The vehicle log of the last run stays available as `vehicles` for
    diagnostics and reference checks.
    """

    def __init__(
        self,
        topology: IntersectionTopology,
        w: int = DTwin.W,
        bucket_seconds: int = DTwin.BUCKET_SECONDS,
        geometry: Optional[LaneGeometry] = None,
        log: Optional[TwinLog] = None,
    ) -> None:
        self.topology = topology
        self.w = w
        self.bucket_seconds = bucket_seconds
        self.geometry = geometry or LaneGeometry.for_topology(topology)
        self.log = log or TwinLog(DModule.SIMKIT)
        self.vehicles: List[Vehicle] = []
        self._exit_of = topology.exit_lane_of()

    def _arrivals(self, scenario: DemandScenario) -> List[Tuple[str, int, int]]:
        """(approach, second, k) for every arrival, in time order."""
        window_s = self.w * self.bucket_seconds
        out: List[Tuple[str, int, int]] = []
        if scenario.arrivals is not None:
            seen: Dict[Tuple[str, int], int] = {}
            for a, t in sorted(scenario.arrivals, key=lambda x: (x[1], x[0])):
                if 0 <= t < window_s:
                    k = seen.get((a, t), 0)
                    seen[(a, t)] = k + 1
                    out.append((a, t, k))
            return out
        for ai, a in enumerate(DApproach.ORDER):
            rate = scenario.rate(a)
            if rate <= 0:
                continue
            u = np.random.default_rng([scenario.seed, _ARRIVAL_STREAM, ai]).random(
                window_s
            )
            counts = np.maximum(poisson.ppf(u, rate / 3600.0), 0).astype(np.int64)
            for t in np.flatnonzero(counts):
                for k in range(int(counts[t])):
                    out.append((a, int(t), k))
        out.sort(key=lambda x: (x[1], DApproach.ORDER.index(x[0]), x[2]))
        return out

    def _new_vehicle(
        self,
        vid: int,
        approach: str,
        t: int,
        k: int,
        scenario: DemandScenario,
        load: Dict[str, int],
    ) -> Vehicle:
        ai = DApproach.ORDER.index(approach)
        rng = np.random.default_rng([scenario.seed, _VEHICLE_STREAM, ai, t, k])
        u_move, u_speed, u_inflow, u_reassign, u_lane = rng.random(5)
        z = rng.standard_normal()

        row = np.asarray(scenario.tmc.ratios[ai])
        cum = np.cumsum(row)
        pick = int(np.searchsorted(cum, u_move * cum[-1], "right"))
        movement = DMovement.ORDER[min(pick, 2)]
        if row[DMovement.ORDER.index(movement)] == 0:
            movement = DMovement.ORDER[int(np.flatnonzero(row)[-1])]

        drv = scenario.drv
        lo, hi = DDrv.SPEED_FACTOR_CLIP
        mean, sd = scenario.speed_factor_mean, scenario.speed_factor_sd
        factor = float(
            truncnorm.ppf(u_speed, (lo - mean) / sd, (hi - mean) / sd, loc=mean, scale=sd)
        )
        travel = self.geometry.setback_m / (self.geometry.free_flow_ms * factor)
        travel += dispersion_sd(travel, drv) * z
        t_queue = t + max(1, int(round(travel)))

        feeders = self.topology.inflow_of(approach)
        inflow_lane = feeders[min(int(u_inflow * len(feeders)), len(feeders) - 1)]

        lanes: Tuple[Lane, ...] = self.topology.lanes_of(approach, movement)
        if u_reassign < reassign_probability(drv):
            lane = lanes[min(int(u_lane * len(lanes)), len(lanes) - 1)]
        else:
            lane = min(lanes, key=lambda ln: (load[ln.lane_id], ln.index))

        return Vehicle(
            vid=vid,
            approach=approach,
            movement=movement,
            t_inflow=t,
            inflow_lane=inflow_lane.lane_id,
            lane=lane.lane_id,
            t_queue=t_queue,
            exit_lane=self._exit_of[lane.lane_id],
        )

    def simulate(
        self, plan: SignalTimingPlan, scenario: DemandScenario
    ) -> SimulationRecord:
        """
        Run one scenario and parse the detectors into a SimulationRecord.

        The run records w buckets and keeps going for a flush tail of two
        cycles, extended one cycle at a time (up to 20) until every vehicle
        has left. A record that still holds vehicles carries a
        non-conservation warning in meta["warnings"].

        Raises:
            InvalidArgumentError: Rates above twice the base rate
            MappingError: Demand routed to a movement without lanes
        """
        scenario.validate(self.topology)
        drv = scenario.drv
        bs = self.bucket_seconds
        window_s = self.w * bs
        cycle = plan.cycle_length_s
        headway = saturation_headway(drv)
        startup = startup_loss(drv)

        phase_of = {
            ln.lane_id: PHASE_OF[(ln.approach, ln.movement)]
            for ln in self.topology.incoming
        }
        starts = {p: plan.phase_start(p) for p in range(1, 9)}
        greens = {p: plan.phase(p).green for p in range(1, 9)}

        def is_green(p: int, t: int) -> bool:
            pos = (t - plan.offset_s) % cycle
            return starts[p] <= pos < starts[p] + greens[p]

        arrivals = self._arrivals(scenario)
        lanes = [ln.lane_id for ln in self.topology.incoming]
        queues: Dict[str, Deque[int]] = {ln: deque() for ln in lanes}
        load = {ln: 0 for ln in lanes}
        next_free = {ln: float("-inf") for ln in lanes}
        startup_until = {ln: float("-inf") for ln in lanes}
        pending: List[Tuple[int, int]] = []
        vehicles: List[Vehicle] = []

        end = window_s + DSim.FLUSH_CYCLES * cycle
        extra = 0
        cursor = 0
        discharged = 0
        last_exit = -1
        t = 0
        while True:
            if t >= end:
                drained = discharged == len(vehicles) and last_exit < end
                if drained or extra >= DSim.MAX_EXTRA_FLUSH_CYCLES:
                    break
                end += cycle
                extra += 1

            while cursor < len(arrivals) and arrivals[cursor][1] == t:
                a, _, k = arrivals[cursor]
                v = self._new_vehicle(len(vehicles), a, t, k, scenario, load)
                vehicles.append(v)
                load[v.lane] += 1
                heapq.heappush(pending, (v.t_queue, v.vid))
                cursor += 1

            while pending and pending[0][0] <= t:
                _, vid = heapq.heappop(pending)
                queues[vehicles[vid].lane].append(vid)

            for ln in lanes:
                p = phase_of[ln]
                if not is_green(p, t):
                    continue
                if not is_green(p, t - 1):
                    startup_until[ln] = t + startup
                queue = queues[ln]
                if queue and t >= next_free[ln] and t >= startup_until[ln]:
                    v = vehicles[queue.popleft()]
                    v.t_stop = t
                    v.t_exit = t + DSim.CROSSING_S[v.movement]
                    last_exit = max(last_exit, v.t_exit)
                    next_free[ln] = t + headway
                    load[ln] -= 1
                    discharged += 1
            t += 1

        self.vehicles = vehicles
        return self._parse(plan, scenario, vehicles, end)

    def _parse(
        self,
        plan: SignalTimingPlan,
        scenario: DemandScenario,
        vehicles: List[Vehicle],
        end: int,
    ) -> SimulationRecord:
        bs = self.bucket_seconds
        window_s = self.w * bs
        counter = SaturationCounter(log=self.log)
        raw = {"inf": 0, "stp": 0, "ext": 0}

        def wave(lane_id: str, kind: WaveKind, times: List[int], key: str) -> Waveform:
            inside = [t for t in times if t < window_s]
            raw[key] += len(inside)
            counts = np.bincount(
                np.asarray(inside, dtype=np.int64) // bs, minlength=self.w
            )
            return Waveform(
                lane_id, kind, tuple(clip_saturation(counts, counter=counter)), bs
            )

        by_lane: Dict[str, List[int]] = {}
        for v in vehicles:
            by_lane.setdefault(v.inflow_lane, []).append(v.t_inflow)
            if v.t_stop is not None:
                by_lane.setdefault(v.lane, []).append(v.t_stop)
            if v.t_exit is not None and v.t_exit < end:
                by_lane.setdefault(v.exit_lane, []).append(v.t_exit)

        stp = {
            ln.lane_id: wave(ln.lane_id, WaveKind.STOPBAR, by_lane.get(ln.lane_id, []), "stp")
            for ln in self.topology.incoming
        }
        ext = {
            ln.lane_id: wave(ln.lane_id, WaveKind.EXIT, by_lane.get(ln.lane_id, []), "ext")
            for ln in self.topology.outgoing
        }
        inf = {
            ln.lane_id: wave(ln.lane_id, WaveKind.INFLOW, by_lane.get(ln.lane_id, []), "inf")
            for ln in self.topology.inflow
        }

        totals: Dict[str, List[int]] = {}
        for v in vehicles:
            row = totals.setdefault(v.stream, [0, 0, 0])
            row[0] += 1
            row[1] += v.t_stop is not None
            row[2] += v.t_exit is not None and v.t_exit < end

        warnings: List[str] = []
        left = sum(1 for v in vehicles if v.t_exit is None or v.t_exit >= end)
        if left:
            message = DTwinMsgText.NON_CONSERVATION.format(
                left=left, flush=end - window_s
            )
            warnings.append(message)
            self.log.warning(message)

        meta = {
            "seed": scenario.seed,
            "warnings": warnings,
            "totals": {k: totals[k] for k in sorted(totals)},
            "raw": raw,
            "saturation": {"events": counter.events, "excess": counter.excess},
            "horizon_s": end,
            "scenario": {
                "rates": list(scenario.rates),
                "regime": scenario.regime.value,
                "hour": scenario.hour,
                "speed_factor": [scenario.speed_factor_mean, scenario.speed_factor_sd],
            },
        }
        return SimulationRecord(
            intersection_id=self.topology.intersection_id,
            plan=plan,
            sig=render_series(plan, self.w, bs),
            tmc=scenario.tmc,
            drv=scenario.drv,
            stp=stp,
            ext=ext,
            inf=inf,
            meta=meta,
        )


def simulate(
    topology: IntersectionTopology,
    plan: SignalTimingPlan,
    scenario: DemandScenario,
    w: int = DTwin.W,
    bucket_seconds: int = DTwin.BUCKET_SECONDS,
    log: Optional[TwinLog] = None,
) -> SimulationRecord:
    """Convenience wrapper around IntersectionSim.simulate()."""
    return IntersectionSim(topology, w, bucket_seconds, log=log).simulate(plan, scenario)
