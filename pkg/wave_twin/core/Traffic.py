# wave_twin/core/Traffic.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from wave_twin.constants.DTwin import DApproach, DDrv, DTwin, DTwinErr
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError

TMC_TOL = 1e-9


@dataclass(frozen=True)
class TurningMovementCounts:
    """
    Per-approach left/through/right fractions over the demand horizon.

    Rows follow DApproach.ORDER (NB, SB, EB, WB), columns DMovement.ORDER
    (L, T, R). A row of all zeros marks an absent approach; every other row
    sums to one.
    """

    ratios: Tuple[Tuple[float, float, float], ...]
    horizon_seconds: int = DTwin.TMC_HORIZON_S

    def __post_init__(self) -> None:
        rows = tuple(tuple(float(v) for v in row) for row in self.ratios)
        if len(rows) != 4 or any(len(r) != 3 for r in rows):
            raise ShapeError(
                DTwinErr.SHAPE.format(
                    op="tmc", a=np.shape(self.ratios), b=(4, 3)
                ),
                np.shape(self.ratios),
                (4, 3),
            )
        for approach, row in zip(DApproach.ORDER, rows):
            for v in row:
                if not 0.0 <= v <= 1.0:
                    raise InvalidArgumentError(DTwinErr.TMC_ENTRY.format(value=v))
            total = sum(row)
            if total != 0.0 and abs(total - 1.0) > TMC_TOL:
                raise InvalidArgumentError(
                    DTwinErr.TMC_ROW.format(approach=approach, total=total)
                )
        object.__setattr__(self, "ratios", rows)

    @property
    def absent(self) -> Tuple[bool, ...]:
        return tuple(sum(row) == 0.0 for row in self.ratios)

    def matrix(self) -> np.ndarray:
        return np.asarray(self.ratios, dtype=np.float64)

    def row(self, approach: str) -> np.ndarray:
        return self.matrix()[DApproach.ORDER.index(approach)]

    def flat(self) -> np.ndarray:
        return self.matrix().reshape(-1)

    def rotated(self, approach: str) -> np.ndarray:
        """Rows rolled so the given approach comes first."""
        return np.roll(self.matrix(), -DApproach.ORDER.index(approach), axis=0)

    def to_list(self) -> List[List[float]]:
        return [list(row) for row in self.ratios]

    @classmethod
    def from_list(
        cls, rows: Sequence[Sequence[float]], horizon_seconds: int = DTwin.TMC_HORIZON_S
    ) -> "TurningMovementCounts":
        return cls(tuple(tuple(r) for r in rows), horizon_seconds)

    @classmethod
    def from_rows(
        cls, rows: Dict[str, Sequence[float]]
    ) -> "TurningMovementCounts":
        """Build from an {approach: [l, t, r]} mapping, missing approaches zero."""
        return cls(
            tuple(tuple(rows.get(a, (0.0, 0.0, 0.0))) for a in DApproach.ORDER)
        )

    @staticmethod
    def normalized(weights: np.ndarray) -> np.ndarray:
        """Renormalize non-negative weights row-wise; all-zero rows stay zero."""
        weights = np.asarray(weights, dtype=np.float64)
        sums = weights.sum(axis=1, keepdims=True)
        out = np.divide(weights, sums, out=np.zeros_like(weights), where=sums > 0)
        # Push the rounding residue into the largest entry so rows sum to 1
        for i in range(out.shape[0]):
            if sums[i, 0] > 0:
                j = int(np.argmax(out[i]))
                out[i, j] += 1.0 - out[i].sum()
        return out


def _bounded(name: str) -> Any:
    lo, hi = DDrv.RANGES[name]
    return Field(ge=lo, le=hi)


class DrivingBehavior(BaseModel):
    """
    The nine car-following and lane-changing parameters of a scenario.

    Every field must lie inside its DDrv.RANGES interval, bounds included.
    Validation failures surface as InvalidArgumentError.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    accel: float = _bounded("accel")
    decel: float = _bounded("decel")
    emergency_decel: float = _bounded("emergency_decel")
    min_gap: float = _bounded("min_gap")
    sigma: float = _bounded("sigma")
    tau: float = _bounded("tau")
    lc_strategic: float = _bounded("lc_strategic")
    lc_cooperative: float = _bounded("lc_cooperative")
    lc_speed_gain: float = _bounded("lc_speed_gain")

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            first = e.errors()[0]
            name = str(first["loc"][0]) if first["loc"] else "drv"
            if name in DDrv.RANGES and first["type"] in ("greater_than_equal", "less_than_equal"):
                lo, hi = DDrv.RANGES[name]
                msg = DTwinErr.DRV_RANGE.format(name=name, value=first["input"], lo=lo, hi=hi)
            else:
                msg = f"driving behavior {name}: {first['msg']}"
            raise InvalidArgumentError(msg) from e

    def vector(self) -> np.ndarray:
        return np.asarray([getattr(self, n) for n in DDrv.FIELDS], dtype=np.float64)

    def to_dict(self) -> Dict[str, float]:
        return {n: getattr(self, n) for n in DDrv.FIELDS}

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "DrivingBehavior":
        missing = [n for n in DDrv.FIELDS if n not in data]
        if missing:
            raise InvalidArgumentError(f"driving behavior missing fields {missing}")
        return cls(**{n: float(data[n]) for n in DDrv.FIELDS})

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> "DrivingBehavior":
        if len(values) != len(DDrv.FIELDS):
            raise ShapeError(
                DTwinErr.SHAPE.format(op="drv", a=(len(values),), b=(9,)),
                (len(values),),
                (9,),
            )
        return cls(**{n: float(v) for n, v in zip(DDrv.FIELDS, values)})

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "DrivingBehavior":
        return cls(**{n: float(rng.uniform(*DDrv.RANGES[n])) for n in DDrv.FIELDS})

    @classmethod
    def midpoint(cls) -> "DrivingBehavior":
        return cls(**{n: sum(DDrv.RANGES[n]) / 2.0 for n in DDrv.FIELDS})
