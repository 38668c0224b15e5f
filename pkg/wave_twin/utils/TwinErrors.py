# wave_twin/utils/TwinErrors.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Exception hierarchy shared by every Wave Twin module.

The command line maps configuration-type errors (InvalidArgumentError and
its children, CapacityError, MappingError, FeasibilityError, ConfigError) to
exit code 2 and everything else to exit code 1.
"""

from typing import Optional, Tuple


class TwinError(Exception):
    """Base class for all Wave Twin errors."""


class InvalidArgumentError(TwinError, ValueError):
    """An argument is outside the domain of an operation."""


class ShapeError(InvalidArgumentError):
    """Two operands or a record component have incompatible shapes."""

    def __init__(self, message: str, a: Tuple = (), b: Tuple = ()) -> None:
        super().__init__(message)
        self.a = a
        self.b = b


class CapacityError(TwinError):
    """A topology has more lanes than its template can hold."""

    def __init__(self, message: str, approach: str) -> None:
        super().__init__(message)
        self.approach = approach


class MappingError(TwinError):
    """A lane cannot be placed into a template slot."""

    def __init__(self, message: str, lane_id: Optional[str] = None) -> None:
        super().__init__(message)
        self.lane_id = lane_id


class FeasibilityError(TwinError):
    """Signal constraints leave no valid plan."""

    def __init__(self, message: str, ring: Optional[int] = None) -> None:
        super().__init__(message)
        self.ring = ring


class ConfigError(TwinError):
    """A configuration document or variant combination is unsupported."""


class DivergenceError(TwinError):
    """Training produced a NaN loss or gradient."""

    def __init__(
        self,
        message: str,
        epoch: Optional[int] = None,
        step: Optional[int] = None,
        name: Optional[str] = None,
    ) -> None:
        super().__init__(message)
        self.epoch = epoch
        self.step = step
        self.name = name


class WorkerTimeout(TwinError):
    """A corpus worker did not answer within the receive timeout."""


class CorpusError(TwinError):
    """Writing or generating a corpus scenario failed."""

    def __init__(self, message: str, index: int) -> None:
        super().__init__(message)
        self.index = index


# Errors the command line reports with exit code 2
CONFIG_ERRORS = (
    InvalidArgumentError,
    CapacityError,
    MappingError,
    FeasibilityError,
    ConfigError,
)
