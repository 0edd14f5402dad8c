"""Decision rules: the policy interface and the two heuristic policies.

A policy sees the stage, the stored energy and the realized PV/load for the
stage, and returns a grid/battery power pair that balances them.
"""
from __future__ import annotations

from dataclasses import dataclass

from .scenario import Scenario
from .storage import feasible_decision_space


@dataclass(frozen=True)
class Decision:
    u: float  # grid power into the unit, kW
    v: float  # battery output, kW


class Policy:
    name = "policy"

    def decide(self, k: int, s: float, e: float, l: float, scenario: Scenario) -> Decision:
        raise NotImplementedError


def clamp_decision_to_feasible(u_raw: float, s: float, e: float, l: float,
                               scenario: Scenario) -> Decision:
    """Project ``u_raw`` onto the feasible space for this realization."""
    space = feasible_decision_space(s, e, l, scenario.dt, scenario.battery)
    u = space.project(u_raw)
    return Decision(u, -(u + e + l))


def _battery_first(target_v: float, s: float, e: float, l: float,
                   scenario: Scenario) -> Decision:
    spec, dt = scenario.battery, scenario.dt
    v = min(max(target_v, spec.charge_limit(s, dt)), spec.discharge_limit(s, dt))
    return clamp_decision_to_feasible(-(e + l + v), s, e, l, scenario)


def policy1_decide(k: int, s: float, e: float, l: float, scenario: Scenario) -> Decision:
    """Exhaustive storage dependence: the battery absorbs the whole imbalance
    as far as its power and state limits allow; the grid covers the rest."""
    return _battery_first(-(e + l), s, e, l, scenario)


def lookahead_sum(k: int, scenario: Scenario, horizon_h: float) -> float:
    """Expected net supply over the next ``horizon_h`` hours, stopping at stage N."""
    steps = int(round(horizon_h / scenario.dt))
    last = min(k + steps, scenario.N)
    return float(scenario.expected_net[k + 1:last + 1].sum())


def policy2_decide(k: int, s: float, e: float, l: float, scenario: Scenario,
                   lookahead_h: float = 3) -> Decision:
    """Finite lookahead heuristic.

    Branch order:
      1. present surplus (>= 0) and expected future surplus (> 0): charge
         battery-first, export the rest;
      2. present deficit (< 0) and expected future deficit (< 0): discharge
         min(deficit, half the dischargeable power), import the rest;
      3. otherwise leave the battery idle and balance with the grid.
    """
    present = e + l
    future = lookahead_sum(k, scenario, lookahead_h)
    if present >= 0 and future > 0:
        return _battery_first(-present, s, e, l, scenario)
    if present < 0 and future < 0:
        half = 0.5 * scenario.battery.discharge_limit(s, scenario.dt)
        return _battery_first(min(-present, half), s, e, l, scenario)
    return clamp_decision_to_feasible(-present, s, e, l, scenario)


class Policy1(Policy):
    name = "policy1"

    def decide(self, k, s, e, l, scenario):
        return policy1_decide(k, s, e, l, scenario)


class Policy2(Policy):
    name = "policy2"

    def __init__(self, lookahead_h: float = 3):
        self.lookahead_h = lookahead_h

    def decide(self, k, s, e, l, scenario):
        return policy2_decide(k, s, e, l, scenario, self.lookahead_h)
