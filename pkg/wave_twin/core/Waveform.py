# wave_twin/core/Waveform.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from wave_twin.constants.DTwin import DTwin, DTwinErr, DTwinMsgText
from wave_twin.utils.TwinErrors import InvalidArgumentError
from wave_twin.utils.TwinLog import TwinLog


class WaveKind(str, Enum):
    """
    Detector family a waveform was recorded by.
    """

    STOPBAR = "stp"
    EXIT = "ext"
    INFLOW = "inf"


@dataclass(frozen=True)
class Waveform:
    """
    One detector's time series of per-bucket vehicle counts.

    Counts are non-negative integers. At the canonical 5 second resolution
    they never exceed the saturation cap of 8; coarser waveforms produced by
    rebucket() may hold up to cap * (bucket_seconds / 5).
    """

    lane_id: str
    kind: WaveKind
    buckets: Tuple[int, ...]
    bucket_seconds: int = DTwin.BUCKET_SECONDS

    def __post_init__(self) -> None:
        object.__setattr__(self, "buckets", tuple(int(b) for b in self.buckets))
        object.__setattr__(self, "kind", WaveKind(self.kind))
        if self.bucket_seconds <= 0:
            raise InvalidArgumentError(
                f"bucket_seconds must be positive, got {self.bucket_seconds}"
            )
        cap = DTwin.SATURATION * max(1, self.bucket_seconds // DTwin.BUCKET_SECONDS)
        for i, b in enumerate(self.buckets):
            if b < 0:
                raise InvalidArgumentError(
                    DTwinErr.NEGATIVE_COUNT.format(value=b, index=i)
                )
            if b > cap:
                raise InvalidArgumentError(
                    f"count {b} at index {i} exceeds cap {cap} of {self.lane_id}"
                )

    @property
    def w(self) -> int:
        return len(self.buckets)

    def total(self) -> int:
        return sum(self.buckets)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.buckets, dtype=np.int64)

    def check_window(self, w: int) -> None:
        if self.w != w:
            raise InvalidArgumentError(
                DTwinErr.WINDOW.format(lane_id=self.lane_id, got=self.w, want=w)
            )

    @classmethod
    def zeros(
        cls,
        lane_id: str,
        kind: WaveKind,
        w: int = DTwin.W,
        bucket_seconds: int = DTwin.BUCKET_SECONDS,
    ) -> "Waveform":
        return cls(lane_id, kind, (0,) * w, bucket_seconds)


def rebucket_array(values: np.ndarray, factor: int, axis: int = -1) -> np.ndarray:
    """
    Sum consecutive groups of `factor` buckets along `axis`.

    Works on integer counts and on float predictions alike.

    Raises:
        InvalidArgumentError: If factor is not a positive divisor of the axis
    """
    values = np.asarray(values)
    w = values.shape[axis]
    if factor < 1 or w % factor != 0:
        raise InvalidArgumentError(DTwinErr.REBUCKET.format(factor=factor, w=w))
    if factor == 1:
        return values.copy()
    moved = np.moveaxis(values, axis, -1)
    summed = moved.reshape(moved.shape[:-1] + (w // factor, factor)).sum(axis=-1)
    return np.moveaxis(summed, -1, axis)


def rebucket(wf: Waveform, factor: int) -> Waveform:
    """
    Aggregate a waveform to a coarser resolution.

    Output bucket i is the sum of input buckets [i*factor, (i+1)*factor); the
    total count is preserved exactly.

    Args:
        wf (Waveform): Input waveform
        factor (int): Positive divisor of wf.w

    Returns:
        Waveform: The coarser waveform, bucket_seconds multiplied by factor
    """
    summed = rebucket_array(wf.as_array(), factor)
    return replace(
        wf,
        buckets=tuple(int(v) for v in summed),
        bucket_seconds=wf.bucket_seconds * factor,
    )


@dataclass
class SaturationCounter:
    """
    Diagnostic counter of buckets clipped at the saturation cap.
    """

    events: int = 0
    excess: int = 0
    log: Optional[TwinLog] = field(default=None, repr=False)

    def add(self, events: int, excess: int) -> None:
        self.events += events
        self.excess += excess
        if events and self.log is not None:
            self.log.debug(
                DTwinMsgText.SATURATION.format(count=events, cap=DTwin.SATURATION)
            )


def clip_saturation(
    counts: Sequence[int],
    cap: int = DTwin.SATURATION,
    counter: Optional[SaturationCounter] = None,
) -> np.ndarray:
    """
    Clip per-bucket counts at the detector saturation cap.

    Args:
        counts (Sequence[int]): Non-negative counts
        cap (int): Saturation cap (default 8 vehicles per 5 s bucket)
        counter (Optional[SaturationCounter]): Receives the number of clipped
            buckets and the number of vehicles cut off

    Returns:
        np.ndarray: min(count, cap) per entry

    Raises:
        InvalidArgumentError: If any count is negative
    """
    arr = np.asarray(counts, dtype=np.int64)
    negative = np.flatnonzero(arr < 0)
    if negative.size:
        i = int(negative[0])
        raise InvalidArgumentError(
            DTwinErr.NEGATIVE_COUNT.format(value=int(arr.flat[i]), index=i)
        )
    over = arr > cap
    if counter is not None:
        counter.add(int(over.sum()), int((arr[over] - cap).sum()))
    return np.minimum(arr, cap)
