# wave_twin/simkit/Demand.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from wave_twin.constants.DTwin import DApproach, DDrv, DMovement, DSim
from wave_twin.core.Topology import IntersectionTopology
from wave_twin.core.Traffic import DrivingBehavior, TurningMovementCounts
from wave_twin.utils.TwinErrors import InvalidArgumentError, MappingError


class Regime(str, Enum):
    """
    Demand regimes: field turning ratios with an hour-of-day demand profile,
    or simplex-sampled turning ratios with rates anywhere in [0, 2 x base].
    """

    REAL = "real"
    RANDOM = "random"


@dataclass(frozen=True)
class LaneGeometry:
    """
    Detector placement along an approach.

    The inflow detector sits `setback_m` upstream of the stop-bar; the exit
    detector sits at the start of the outflow lanes.
    """

    setback_m: float = DSim.SETBACK_M
    free_flow_ms: float = DSim.FREE_FLOW_MS

    def __post_init__(self) -> None:
        if self.setback_m <= 0 or self.free_flow_ms <= 0:
            raise InvalidArgumentError("setback and free-flow speed must be positive")

    @classmethod
    def for_spacing(cls, spacing_m: Optional[float]) -> "LaneGeometry":
        """Half the spacing to the next intersection when it is under 750 m."""
        if spacing_m is not None and spacing_m < DSim.SPACING_RULE_M:
            return cls(setback_m=spacing_m / 2.0)
        return cls()

    @classmethod
    def for_topology(cls, topology: IntersectionTopology) -> "LaneGeometry":
        return cls.for_spacing(topology.doc.spacing_m)


@dataclass(frozen=True)
class DemandScenario:
    """
    Everything the simulator draws vehicles from.

    Attributes:
        rates (Tuple[float, ...]): Arrival rate per approach in veh/h,
            ordered as DApproach.ORDER
        regime (Regime): real or random
        tmc (TurningMovementCounts): Turning ratios
        drv (DrivingBehavior): Driving behavior
        seed (int): Scenario seed; every vehicle draw is keyed on it
        speed_factor_mean (float): Mean of the per-vehicle speed factor
        speed_factor_sd (float): Standard deviation of the speed factor
        hour (Optional[int]): Hour of day for the real regime
        arrivals (Optional[Tuple[Tuple[str, int], ...]]): Explicit
            (approach, second) arrivals replacing the Poisson process
    """

    rates: Tuple[float, float, float, float]
    regime: Regime
    tmc: TurningMovementCounts
    drv: DrivingBehavior
    seed: int
    speed_factor_mean: float = 1.2
    speed_factor_sd: float = 0.5
    hour: Optional[int] = None
    arrivals: Optional[Tuple[Tuple[str, int], ...]] = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "regime", Regime(self.regime))
        rates = tuple(float(r) for r in self.rates)
        if len(rates) != 4 or any(r < 0 for r in rates):
            raise InvalidArgumentError(f"rates must be 4 non-negative values: {rates}")
        object.__setattr__(self, "rates", rates)
        lo, hi = DDrv.SPEED_FACTOR_MEAN
        if not lo <= self.speed_factor_mean <= hi:
            raise InvalidArgumentError(
                f"speed factor mean {self.speed_factor_mean} outside [{lo}, {hi}]"
            )
        lo, hi = DDrv.SPEED_FACTOR_SD
        if not lo <= self.speed_factor_sd <= hi:
            raise InvalidArgumentError(
                f"speed factor sd {self.speed_factor_sd} outside [{lo}, {hi}]"
            )

    def rate(self, approach: str) -> float:
        return self.rates[DApproach.ORDER.index(approach)]

    def validate(self, topology: IntersectionTopology) -> None:
        """
        Check the scenario against a topology.

        Raises:
            InvalidArgumentError: A rate exceeds twice the approach's base rate
            MappingError: Demand is routed to a movement with no lane
        """
        for r, a in enumerate(DApproach.ORDER):
            cap = 2.0 * topology.base_rate(a)
            if self.rates[r] > cap + 1e-9:
                raise InvalidArgumentError(
                    f"rate {self.rates[r]} veh/h on {a} exceeds 2 x base ({cap})"
                )
            row = self.tmc.ratios[r]
            for c, m in enumerate(DMovement.ORDER):
                if row[c] > 0 and not topology.lanes_of(a, m):
                    raise MappingError(
                        f"turning ratio {row[c]} routes {a} {m} traffic to no lane",
                        f"{a}_{m}",
                    )
            if self.rates[r] > 0 and sum(row) == 0:
                raise MappingError(f"{a} has demand but no turning ratios", a)
        if self.arrivals:
            for a, _ in self.arrivals:
                if a not in topology.approaches or sum(self.tmc.row(a)) == 0:
                    raise MappingError(f"explicit arrival on {a} has nowhere to go", a)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rates": list(self.rates),
            "regime": self.regime.value,
            "tmc": self.tmc.to_list(),
            "drv": self.drv.to_dict(),
            "seed": self.seed,
            "speed_factor": [self.speed_factor_mean, self.speed_factor_sd],
            "hour": self.hour,
            "arrivals": [list(a) for a in self.arrivals] if self.arrivals else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DemandScenario":
        arrivals = data.get("arrivals")
        return cls(
            rates=tuple(data["rates"]),  # type: ignore[arg-type]
            regime=Regime(data["regime"]),
            tmc=TurningMovementCounts.from_list(data["tmc"]),
            drv=DrivingBehavior.from_dict(data["drv"]),
            seed=int(data["seed"]),
            speed_factor_mean=float(data["speed_factor"][0]),
            speed_factor_sd=float(data["speed_factor"][1]),
            hour=data.get("hour"),
            arrivals=tuple((a, int(t)) for a, t in arrivals) if arrivals else None,
        )


def sample_simplex_tmc(
    rng: np.random.Generator, topology: IntersectionTopology
) -> TurningMovementCounts:
    """
    Uniform draw from the simplex over each approach's available movements.
    """
    weights = np.zeros((4, 3))
    for r, a in enumerate(DApproach.ORDER):
        present = [c for c, m in enumerate(DMovement.ORDER) if topology.lanes_of(a, m)]
        if present:
            weights[r, present] = rng.dirichlet(np.ones(len(present)))
    return TurningMovementCounts.from_list(
        TurningMovementCounts.normalized(weights).tolist()
    )


def sample_scenario(
    rng: np.random.Generator,
    topology: IntersectionTopology,
    regime: Regime,
    seed: int,
) -> DemandScenario:
    """
    Draw the demand of one scenario.

    Args:
        rng (np.random.Generator): Source of all parameter draws
        topology (IntersectionTopology): Intersection the demand feeds
        regime (Regime): real or random
        seed (int): Seed stored on the scenario for the vehicle draws

    Returns:
        DemandScenario: The scenario
    """
    regime = Regime(regime)
    drv = DrivingBehavior.sample(rng)
    sf_mean = float(rng.uniform(*DDrv.SPEED_FACTOR_MEAN))
    sf_sd = float(rng.uniform(*DDrv.SPEED_FACTOR_SD))
    hour: Optional[int] = None
    if regime == Regime.REAL:
        slot = int(rng.integers(0, len(DSim.HOUR_PROFILE)))
        hour = 6 + slot
        factor = DSim.HOUR_PROFILE[slot]
        rates = tuple(topology.base_rate(a) * factor for a in DApproach.ORDER)
        tmc = topology.field_tmc()
    else:
        rates = tuple(
            float(rng.uniform(0.0, 2.0 * topology.base_rate(a)))
            for a in DApproach.ORDER
        )
        tmc = sample_simplex_tmc(rng, topology)
    return DemandScenario(
        rates=rates,  # type: ignore[arg-type]
        regime=regime,
        tmc=tmc,
        drv=drv,
        seed=seed,
        speed_factor_mean=sf_mean,
        speed_factor_sd=sf_sd,
        hour=hour,
    )
