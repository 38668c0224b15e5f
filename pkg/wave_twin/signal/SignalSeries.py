# wave_twin/signal/SignalSeries.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass
from typing import List

import numpy as np

from wave_twin.constants.DTwin import DSignal, DTwin
from wave_twin.signal.SignalPlan import SignalTimingPlan
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError


def green_seconds(plan: SignalTimingPlan, n_seconds: int) -> np.ndarray:
    """
    Second-by-second green indicator for phases 1 to 8.

    Second t is green for phase p when (t - offset) mod cycle falls inside
    p's green interval. Yellow and all-red seconds are not green.

    Returns:
        np.ndarray: Boolean array of shape (8, n_seconds)
    """
    pos = (np.arange(n_seconds) - plan.offset_s) % plan.cycle_length_s
    out = np.zeros((DSignal.N_PHASES, n_seconds), dtype=bool)
    for p in range(1, DSignal.N_PHASES + 1):
        start = plan.phase_start(p)
        out[p - 1] = (pos >= start) & (pos < start + plan.phase(p).green)
    return out


@dataclass(frozen=True, eq=False)
class SignalStateSeries:
    """
    Binary 8 x w green indicator at bucket resolution.
    """

    green: np.ndarray
    bucket_seconds: int = DTwin.BUCKET_SECONDS

    def __post_init__(self) -> None:
        arr = np.asarray(self.green, dtype=np.uint8)
        if arr.ndim != 2 or arr.shape[0] != DSignal.N_PHASES:
            raise ShapeError(
                f"signal series must be 8 x w, got {arr.shape}",
                arr.shape,
                (DSignal.N_PHASES, -1),
            )
        if np.any(arr > 1):
            raise InvalidArgumentError("signal series must be binary")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "green", arr)

    @property
    def w(self) -> int:
        return int(self.green.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignalStateSeries):
            return NotImplemented
        return self.bucket_seconds == other.bucket_seconds and np.array_equal(
            self.green, other.green
        )

    def column(self, b: int) -> np.ndarray:
        return self.green[:, b]

    def ring_exclusive(self) -> bool:
        """At most one phase per ring is green in every bucket."""
        r1 = self.green[[p - 1 for p in DSignal.RING1]].sum(axis=0)
        r2 = self.green[[p - 1 for p in DSignal.RING2]].sum(axis=0)
        return bool(np.all(r1 <= 1) and np.all(r2 <= 1))

    def to_list(self) -> List[List[int]]:
        return self.green.astype(int).tolist()

    @classmethod
    def from_list(
        cls, rows: List[List[int]], bucket_seconds: int = DTwin.BUCKET_SECONDS
    ) -> "SignalStateSeries":
        return cls(np.asarray(rows, dtype=np.uint8), bucket_seconds)


def render_series(
    plan: SignalTimingPlan,
    w: int = DTwin.W,
    bucket_seconds: int = DTwin.BUCKET_SECONDS,
) -> SignalStateSeries:
    """
    Binarize a plan into the per-bucket signal state series.

    Phase p is 1 in bucket b when it is green for at least half of the
    bucket's span, honoring the offset and the cyclic wrap.

    Args:
        plan (SignalTimingPlan): A valid plan
        w (int): Number of buckets
        bucket_seconds (int): Bucket width in seconds

    Returns:
        SignalStateSeries: The 8 x w series
    """
    if w < 1 or bucket_seconds < 1:
        raise InvalidArgumentError(f"invalid window {w} x {bucket_seconds}s")
    per_second = green_seconds(plan, w * bucket_seconds)
    counts = per_second.reshape(DSignal.N_PHASES, w, bucket_seconds).sum(axis=2)
    return SignalStateSeries(
        (2 * counts >= bucket_seconds).astype(np.uint8), bucket_seconds
    )
