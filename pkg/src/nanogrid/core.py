"""Time grids, unit conventions and the exception types shared by every module.

Units used throughout the package:

* power in kW, energy in kWh, prices in $/kWh
* stage duration ``dt`` in hours (config files give it in seconds)
* timestamps in epoch seconds

Sign convention: power flowing *into* the decision-making unit is positive.
PV output ``e >= 0``, load ``l <= 0``, grid purchase ``u > 0`` and battery
discharge ``v > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HOURS_PER_DAY = 24
SECONDS_PER_HOUR = 3600.0


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration values."""


class EmptyDatasetError(ValueError):
    """An input dataset had no usable records."""


class InfeasibleTransitionError(RuntimeError):
    """A battery transition left the state interval [0, capacity]."""


class InfeasibleConfigurationError(RuntimeError):
    """The admissible decision space is empty somewhere on the horizon."""


class ConstraintViolation(RuntimeError):
    """A simulated decision broke power balance, power or state limits."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition ``t_k = t0 + k * dt`` of the planning horizon.

    ``t0`` is in epoch seconds, ``dt`` in hours. ``utc_offset_h`` shifts
    the wall-clock hour used to index the cyclostationary models.
    """

    t0: float
    N: int
    dt: float
    utc_offset_h: float = 0.0

    def __post_init__(self):
        if self.N < 1:
            raise ConfigurationError(f"stage count N must be >= 1, got {self.N}")
        if not self.dt > 0:
            raise ConfigurationError(f"stage duration dt must be > 0, got {self.dt}")

    @property
    def times(self) -> np.ndarray:
        """Epoch timestamps t_0 .. t_N."""
        return self.t0 + np.arange(self.N + 1) * self.dt * SECONDS_PER_HOUR

    @property
    def steps_per_day(self) -> float:
        return HOURS_PER_DAY / self.dt

    def hour(self, k: int) -> int:
        return hour_of_day(k, self)

    def hours(self) -> np.ndarray:
        """Hour of day for every stage 0..N."""
        return np.array([hour_of_day(k, self) for k in range(self.N + 1)], dtype=int)


def build_time_grid(t_start: float, t_end: float, dt_seconds: float,
                    utc_offset_h: float = 0.0) -> TimeGrid:
    """Build the grid for ``[t_start, t_end]`` with stages of ``dt_seconds``."""
    if not t_end > t_start:
        raise ConfigurationError(
            f"horizon end {t_end} must be after start {t_start}")
    if not dt_seconds > 0:
        raise ConfigurationError(f"dt_seconds must be > 0, got {dt_seconds}")
    span = t_end - t_start
    n = span / dt_seconds
    if n != math.floor(n):
        raise ConfigurationError(
            f"horizon span {span} s is not divisible by dt {dt_seconds} s")
    return TimeGrid(t0=float(t_start), N=int(n), dt=dt_seconds / SECONDS_PER_HOUR,
                    utc_offset_h=utc_offset_h)


def hour_of_day(k: int, grid: TimeGrid) -> int:
    """Wall-clock hour (0..23) at stage ``k``."""
    if not 0 <= k <= grid.N:
        raise IndexError(f"stage {k} outside 0..{grid.N}")
    hours = grid.t0 / SECONDS_PER_HOUR + grid.utc_offset_h + k * grid.dt
    return int(math.floor(hours % HOURS_PER_DAY))


def hour_of_timestamp(ts: float, utc_offset_h: float = 0.0) -> int:
    """Wall-clock hour (0..23) of an epoch timestamp."""
    return int(math.floor((ts / SECONDS_PER_HOUR + utc_offset_h) % HOURS_PER_DAY))
