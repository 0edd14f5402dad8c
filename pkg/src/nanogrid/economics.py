"""Time-of-use prices and the cost functionals built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import HOURS_PER_DAY, ConfigurationError


@dataclass(frozen=True)
class PricingSchedule:
    """Hourly buy (c_p) and sell (c_s) prices in $/kWh."""

    buy: tuple
    sell: tuple

    def __post_init__(self):
        buy = tuple(float(x) for x in self.buy)
        sell = tuple(float(x) for x in self.sell)
        object.__setattr__(self, "buy", buy)
        object.__setattr__(self, "sell", sell)
        if len(buy) != HOURS_PER_DAY or len(sell) != HOURS_PER_DAY:
            raise ConfigurationError("pricing needs 24 buy and 24 sell prices")
        if not all(math.isfinite(x) for x in buy + sell):
            raise ConfigurationError("prices must be finite")
        if any(x < 0 for x in sell):
            raise ConfigurationError("sell prices must be >= 0")

    @classmethod
    def flat(cls, buy: float, sell: float) -> "PricingSchedule":
        return cls((buy,) * HOURS_PER_DAY, (sell,) * HOURS_PER_DAY)


def stage_cost(u: float, hour: int, sched: PricingSchedule, dt: float) -> float:
    """Money paid for grid power ``u`` over one stage (negative = revenue)."""
    price = sched.buy[hour] if u > 0 else sched.sell[hour]
    return price * u * dt


def stage_cost_array(u, hour: int, sched: PricingSchedule, dt: float):
    u = np.asarray(u, dtype=float)
    return np.where(u > 0, sched.buy[hour], sched.sell[hour]) * u * dt


def transaction_cost(u_seq: Sequence[float], sched: PricingSchedule, dt: float,
                     hours: Optional[Sequence[int]] = None) -> float:
    """Total grid-transaction cost of a decision sequence.

    ``hours`` gives the hour of day of each entry; by default the sequence
    starts at midnight with hourly stages.
    """
    if hours is None:
        hours = [k % HOURS_PER_DAY for k in range(len(u_seq))]
    return math.fsum(stage_cost(u, h, sched, dt) for u, h in zip(u_seq, hours))


def terminal_cost(expected_s_N: float, m: float, spec, sched: PricingSchedule,
                  hour_N: int) -> float:
    """Penalty m * (S - E[s_N]) * c_s(t_N) for ending below a full battery."""
    return m * (spec.capacity - expected_s_N) * sched.sell[hour_N]


def monetary_terminal(s_N: float, hour_N: int, sched: PricingSchedule) -> float:
    """Leftover charge valued at the sell price, as a (non-positive) cost."""
    return -s_N * sched.sell[hour_N]
