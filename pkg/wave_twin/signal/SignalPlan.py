# wave_twin/signal/SignalPlan.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Randomized ring-and-barrier timing plans.

Ring 1 runs phases 1-2 | 3-4 and ring 2 runs 5-6 | 7-8; the barrier sits
between the two groups and both rings cross it at the same instant. Phases
2 and 6 are the coordinated major-street throughs.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from wave_twin.constants.DTwin import DModule, DSignal, DTwinErr
from wave_twin.utils.TwinErrors import FeasibilityError, InvalidArgumentError
from wave_twin.utils.TwinLog import TwinLog

LEFT_PHASES = (1, 3, 5, 7)
GROUP_1 = ((1, 2), (5, 6))
GROUP_2 = ((3, 4), (7, 8))


class PhaseLimits(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    min_green: int = Field(ge=1)
    max_green: int = Field(ge=1)
    yellow: int = Field(DSignal.YELLOW, ge=1)
    all_red: int = Field(DSignal.ALL_RED, ge=0)

    @model_validator(mode="after")
    def _check(self) -> "PhaseLimits":
        if self.min_green > self.max_green:
            raise ValueError(
                f"min_green {self.min_green} above max_green {self.max_green}"
            )
        return self

    @property
    def clearance(self) -> int:
        return self.yellow + self.all_red

    @property
    def lo(self) -> int:
        return self.min_green + self.clearance

    @property
    def hi(self) -> int:
        return self.max_green + self.clearance


def _default_phases() -> Dict[int, PhaseLimits]:
    phases = {}
    for p in range(1, DSignal.N_PHASES + 1):
        if p in LEFT_PHASES:
            phases[p] = PhaseLimits(
                min_green=DSignal.MIN_GREEN_LEFT, max_green=DSignal.MAX_GREEN_LEFT
            )
        else:
            phases[p] = PhaseLimits(
                min_green=DSignal.MIN_GREEN_THROUGH,
                max_green=DSignal.MAX_GREEN_THROUGH,
            )
    return phases


class SignalConstraints(BaseModel):
    """
    Field-sheet limits a sampled plan must respect.

    Loaded from the constraint JSON file: per-phase min/max green, yellow and
    all-red seconds plus the cycle length range.
    """

    model_config = ConfigDict(extra="forbid")

    cycle_range: Tuple[int, int] = DSignal.CYCLE_RANGES["standard"]
    phases: Dict[int, PhaseLimits] = Field(default_factory=_default_phases)

    @model_validator(mode="after")
    def _check(self) -> "SignalConstraints":
        lo, hi = self.cycle_range
        if lo < 1 or lo > hi:
            raise ValueError(f"invalid cycle range {self.cycle_range}")
        if sorted(self.phases) != list(range(1, DSignal.N_PHASES + 1)):
            raise ValueError("constraints must list phases 1 to 8")
        return self

    @classmethod
    def for_range(cls, name: str) -> "SignalConstraints":
        """Default limits with one of the named cycle ranges (standard, field)."""
        if name not in DSignal.CYCLE_RANGES:
            raise InvalidArgumentError(f"unknown cycle range {name}")
        return cls(cycle_range=DSignal.CYCLE_RANGES[name])

    def pair_bounds(self, pair: Tuple[int, int]) -> Tuple[int, int]:
        a, b = (self.phases[p] for p in pair)
        return a.lo + b.lo, a.hi + b.hi

    def group_bounds(self, group: Tuple[Tuple[int, int], ...]) -> Tuple[int, int]:
        """Interval of group durations both rings can realize."""
        bounds = [self.pair_bounds(pair) for pair in group]
        return max(b[0] for b in bounds), min(b[1] for b in bounds)

    def feasible_cycles(self) -> Tuple[int, int]:
        """
        Cycle lengths inside cycle_range that every ring can fill exactly.

        Raises:
            FeasibilityError: Listing the violated ring budget
        """
        cmin, cmax = self.cycle_range
        for ring, phases in ((1, DSignal.RING1), (2, DSignal.RING2)):
            need = sum(self.phases[p].lo for p in phases)
            room = sum(self.phases[p].hi for p in phases)
            if need > cmax:
                raise FeasibilityError(
                    DTwinErr.FEASIBILITY.format(
                        detail=f"ring {ring} needs {need}s of minimum green and "
                        f"clearance, cycle allows at most {cmax}s"
                    ),
                    ring,
                )
            if room < cmin:
                raise FeasibilityError(
                    DTwinErr.FEASIBILITY.format(
                        detail=f"ring {ring} fills at most {room}s, cycle needs "
                        f"at least {cmin}s"
                    ),
                    ring,
                )
        g1 = self.group_bounds(GROUP_1)
        g2 = self.group_bounds(GROUP_2)
        for name, (lo, hi) in (("1-2/5-6", g1), ("3-4/7-8", g2)):
            if lo > hi:
                raise FeasibilityError(
                    DTwinErr.FEASIBILITY.format(
                        detail=f"rings cannot cross the barrier together in "
                        f"group {name}: needs {lo}s, allows {hi}s"
                    )
                )
        lo, hi = max(cmin, g1[0] + g2[0]), min(cmax, g1[1] + g2[1])
        if lo > hi:
            raise FeasibilityError(
                DTwinErr.FEASIBILITY.format(
                    detail=f"barrier groups span [{g1[0] + g2[0]}, "
                    f"{g1[1] + g2[1]}]s, outside cycle range {self.cycle_range}"
                )
            )
        return lo, hi


@dataclass(frozen=True)
class PhaseTiming:
    phase: int
    min_green: int
    max_green: int
    green: int
    yellow: int
    all_red: int

    @property
    def interval(self) -> int:
        return self.green + self.yellow + self.all_red


@dataclass(frozen=True)
class SignalTimingPlan:
    """
    A fixed-time ring-and-barrier plan in whole seconds.

    Attributes:
        cycle_length_s (int): Common cycle length
        offset_s (int): Start of the cycle relative to the recording window
        barrier_time_s (int): Duration of the first barrier group
        phases (Tuple[PhaseTiming, ...]): Phases 1 to 8 in order
        cycle_range (Tuple[int, int]): Range the cycle was sampled from

    Raises:
        InvalidArgumentError: If any ring-and-barrier invariant is violated
    """

    cycle_length_s: int
    offset_s: int
    barrier_time_s: int
    phases: Tuple[PhaseTiming, ...]
    cycle_range: Tuple[int, int] = DSignal.CYCLE_RANGES["standard"]

    def __post_init__(self) -> None:
        def fail(detail: str) -> None:
            raise InvalidArgumentError(DTwinErr.PLAN.format(detail=detail))

        c = self.cycle_length_s
        if len(self.phases) != DSignal.N_PHASES:
            fail(f"{len(self.phases)} phases")
        if [p.phase for p in self.phases] != list(range(1, DSignal.N_PHASES + 1)):
            fail("phases must be numbered 1 to 8 in order")
        if not self.cycle_range[0] <= c <= self.cycle_range[1]:
            fail(f"cycle {c}s outside {self.cycle_range}")
        if not 0 <= self.offset_s < c:
            fail(f"offset {self.offset_s}s outside [0, {c})")
        for p in self.phases:
            if not p.min_green <= p.green <= p.max_green:
                fail(f"phase {p.phase} green {p.green}s outside limits")
            if p.yellow < 1 or p.all_red < 0:
                fail(f"phase {p.phase} clearance")
        for ring in (DSignal.RING1, DSignal.RING2):
            if sum(self.phase(p).interval for p in ring) != c:
                fail(f"ring {ring} does not fill the {c}s cycle")
            if sum(self.phase(p).interval for p in ring[:2]) != self.barrier_time_s:
                fail(f"ring {ring} does not reach the barrier at {self.barrier_time_s}s")

    def phase(self, p: int) -> PhaseTiming:
        return self.phases[p - 1]

    def phase_start(self, p: int) -> int:
        """Start of phase p's green within the cycle."""
        ring = DSignal.RING1 if p in DSignal.RING1 else DSignal.RING2
        start = 0
        for q in ring:
            if q == p:
                return start
            start += self.phase(q).interval
        raise InvalidArgumentError(f"unknown phase {p}")

    def green_fraction(self, p: int) -> float:
        return self.phase(p).green / self.cycle_length_s

    def with_offset(self, offset_s: int) -> "SignalTimingPlan":
        return SignalTimingPlan(
            self.cycle_length_s,
            offset_s,
            self.barrier_time_s,
            self.phases,
            self.cycle_range,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cycle_length_s": self.cycle_length_s,
            "offset_s": self.offset_s,
            "barrier_time_s": self.barrier_time_s,
            "cycle_range": list(self.cycle_range),
            "phases": [
                [p.phase, p.min_green, p.max_green, p.green, p.yellow, p.all_red]
                for p in self.phases
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SignalTimingPlan":
        return cls(
            cycle_length_s=int(data["cycle_length_s"]),
            offset_s=int(data["offset_s"]),
            barrier_time_s=int(data["barrier_time_s"]),
            phases=tuple(PhaseTiming(*[int(v) for v in row]) for row in data["phases"]),
            cycle_range=tuple(data["cycle_range"]),  # type: ignore[arg-type]
        )


def _split(
    rng: np.random.Generator,
    total: int,
    pair: Tuple[int, int],
    limits: SignalConstraints,
) -> Tuple[int, int]:
    a, b = (limits.phases[p] for p in pair)
    lo = max(a.lo, total - b.hi)
    hi = min(a.hi, total - b.lo)
    first = int(rng.integers(lo, hi + 1))
    return first, total - first


def sample_plan(
    rng_seed: Union[int, np.random.Generator],
    constraints: Optional[SignalConstraints] = None,
    log: Optional[TwinLog] = None,
) -> SignalTimingPlan:
    """
    Draw a random plan that respects every field limit.

    The cycle is uniform over the feasible part of the cycle range, the
    offset uniform in [0, cycle), the barrier uniform over the durations both
    barrier groups can realize, and each ring's green split uniform over the
    interval that keeps both phases of a pair within their limits.

    Args:
        rng_seed (int | np.random.Generator): Seed or generator
        constraints (Optional[SignalConstraints]): Field limits, defaults
            to the standard limits over the 120-240 s range
        log (Optional[TwinLog]): Receives a debug line per plan

    Returns:
        SignalTimingPlan: The sampled plan

    Raises:
        FeasibilityError: If the limits leave no valid plan
    """
    limits = constraints or SignalConstraints()
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )
    cmin, cmax = limits.feasible_cycles()
    g1 = limits.group_bounds(GROUP_1)
    g2 = limits.group_bounds(GROUP_2)

    cycle = int(rng.integers(cmin, cmax + 1))
    offset = int(rng.integers(0, cycle))
    barrier = int(
        rng.integers(max(g1[0], cycle - g2[1]), min(g1[1], cycle - g2[0]) + 1)
    )

    intervals: Dict[int, int] = {}
    for pair in GROUP_1:
        intervals.update(zip(pair, _split(rng, barrier, pair, limits)))
    for pair in GROUP_2:
        intervals.update(zip(pair, _split(rng, cycle - barrier, pair, limits)))

    phases: List[PhaseTiming] = []
    for p in range(1, DSignal.N_PHASES + 1):
        lim = limits.phases[p]
        phases.append(
            PhaseTiming(
                phase=p,
                min_green=lim.min_green,
                max_green=lim.max_green,
                green=intervals[p] - lim.clearance,
                yellow=lim.yellow,
                all_red=lim.all_red,
            )
        )
    plan = SignalTimingPlan(cycle, offset, barrier, tuple(phases), limits.cycle_range)
    if log is not None:
        log.debug(f"{DModule.SIGNAL}: cycle={cycle} offset={offset} barrier={barrier}")
    return plan
