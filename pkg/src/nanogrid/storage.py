"""Battery dynamics and the feasible-decision-space calculus.

All intervals here are intervals for the grid decision ``u`` (kW). Power
balance ``e + u + v + l = 0`` ties the battery power ``v`` to ``u``, so
state and power limits on the battery translate into bounds on ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ConfigurationError, InfeasibleConfigurationError, InfeasibleTransitionError

STATE_TOL = 1e-9  # kWh of floating-point dust tolerated on state updates
EMPTY_TOL = 1e-9  # kW; determinable intervals narrower than -EMPTY_TOL are empty


@dataclass(frozen=True)
class BatterySpec:
    capacity: float  # kWh
    p_min: float  # kW, most negative battery power (charging)
    p_max: float  # kW, largest discharge
    eta_s: float = 1.0
    xi_charge: float = 1.0
    xi_discharge: float = 1.0

    def __post_init__(self):
        if not self.capacity > 0:
            raise ConfigurationError(f"battery capacity must be > 0, got {self.capacity}")
        if not self.p_min <= 0 <= self.p_max:
            raise ConfigurationError(
                f"need p_min <= 0 <= p_max, got p_min={self.p_min}, p_max={self.p_max}")
        if not 0 < self.eta_s <= 1:
            raise ConfigurationError(f"eta_s must lie in (0, 1], got {self.eta_s}")
        if not 0 < self.xi_charge <= 1 <= self.xi_discharge:
            raise ConfigurationError(
                "need 0 < xi_charge <= 1 <= xi_discharge, got "
                f"{self.xi_charge}, {self.xi_discharge}")

    @property
    def symmetric(self) -> bool:
        return self.p_min == -self.p_max and self.xi_charge == self.xi_discharge

    def discharge_limit(self, s: float, dt: float) -> float:
        """Largest battery output v this stage: min(P_max, eta*s / (xi_d dt))."""
        return min(self.p_max, self.eta_s * s / (self.xi_discharge * dt))

    def charge_limit(self, s: float, dt: float) -> float:
        """Most negative battery power this stage: max(P_min, -(S - eta*s) / (xi_c dt))."""
        return max(self.p_min, -(self.capacity - self.eta_s * s) / (self.xi_charge * dt))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def measure(self) -> float:
        return max(0.0, self.hi - self.lo)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def project(self, x: float) -> float:
        if self.empty:
            raise ValueError(f"cannot project onto empty interval {self}")
        return min(max(x, self.lo), self.hi)


def next_state(s, v, dt: float, spec: BatterySpec):
    """Unchecked dynamics s' = eta_s*s - xi(v)*v*dt; works on arrays."""
    xi = np.where(np.asarray(v) > 0, spec.xi_discharge, spec.xi_charge)
    return spec.eta_s * s - xi * v * dt


def check_state(s_next, spec: BatterySpec):
    """Clamp floating-point dust into [0, capacity]; raise on real violations."""
    arr = np.asarray(s_next, dtype=float)
    if np.any(arr < -STATE_TOL) or np.any(arr > spec.capacity + STATE_TOL):
        bad = arr[(arr < -STATE_TOL) | (arr > spec.capacity + STATE_TOL)]
        raise InfeasibleTransitionError(
            f"battery state {bad.ravel()[0]!r} kWh outside [0, {spec.capacity}]")
    return np.clip(arr, 0.0, spec.capacity)


def step_battery(s: float, v: float, dt: float, spec: BatterySpec) -> float:
    """Advance the battery one stage under output power ``v`` (kW)."""
    if not -STATE_TOL <= s <= spec.capacity + STATE_TOL:
        raise InfeasibleTransitionError(f"start state {s!r} outside [0, {spec.capacity}]")
    xi = spec.xi_discharge if v > 0 else spec.xi_charge
    s_next = spec.eta_s * s - xi * v * dt
    if s_next < -STATE_TOL or s_next > spec.capacity + STATE_TOL:
        raise InfeasibleTransitionError(
            f"s={s!r}, v={v!r} kW gives {s_next!r} kWh outside [0, {spec.capacity}]")
    return min(max(s_next, 0.0), spec.capacity)


def state_constraint_interval(s: float, e: float, l: float, dt: float,
                              spec: BatterySpec) -> Interval:
    """Grid decisions that keep the next state inside [0, capacity]."""
    lo = -spec.eta_s * s / (spec.xi_discharge * dt) - l - e
    hi = (spec.capacity - spec.eta_s * s) / (spec.xi_charge * dt) - l - e
    return Interval(lo, hi)


def power_constraint_interval(e: float, l: float, spec: BatterySpec) -> Interval:
    """Grid decisions that keep battery power inside [p_min, p_max].

    Power balance gives v = -(u + e + l), so v in [p_min, p_max] means
    u in [-p_max - l - e, -p_min - l - e].
    """
    return Interval(-spec.p_max - l - e, -spec.p_min - l - e)


def feasible_decision_space(s: float, e: float, l: float, dt: float,
                            spec: BatterySpec) -> Interval:
    """Intersection of the state and power intervals for one realization."""
    lo = -spec.discharge_limit(s, dt) - l - e
    hi = -spec.charge_limit(s, dt) - l - e
    out = Interval(lo, hi)
    if out.empty:
        raise InfeasibleConfigurationError(
            f"empty feasible decision space at s={s}, e={e}, l={l}: {out}")
    return out


def determinable_feasible_space(s: float, e_min: float, e_max: float, l_min: float,
                                l_max: float, dt: float, spec: BatterySpec) -> Interval:
    """Decisions feasible for every realization e in [e_min, e_max], l in [l_min, l_max].

    Widths within ``EMPTY_TOL`` below zero are rounding artefacts of a
    zero-width space and collapse to its midpoint.
    """
    lo = -spec.discharge_limit(s, dt) - l_min - e_min
    hi = -spec.charge_limit(s, dt) - l_max - e_max
    if hi < lo <= hi + EMPTY_TOL:
        mid = 0.5 * (lo + hi)
        return Interval(mid, mid)
    return Interval(lo, hi)


def determinable_bounds(s, e_min, e_max, l_min, l_max, dt, spec: BatterySpec):
    """Vectorized (lo, hi) of the determinable space over an array of states."""
    s = np.asarray(s, dtype=float)
    lo = -np.minimum(spec.p_max, spec.eta_s * s / (spec.xi_discharge * dt)) - l_min - e_min
    hi = -np.maximum(spec.p_min, -(spec.capacity - spec.eta_s * s) / (spec.xi_charge * dt)) - l_max - e_max
    dust = (hi < lo) & (lo <= hi + EMPTY_TOL)
    mid = 0.5 * (lo + hi)
    return np.where(dust, mid, lo), np.where(dust, mid, hi)


# --------------------------------------------------------------------------
# configuration-level sufficiency


def width_bound(dt: float, spec: BatterySpec) -> float:
    """Smallest width of the realization-free decision band over s in [0, S].

    The band width ``discharge_limit(s) - charge_limit(s)`` is concave in s,
    so its minimum sits at s = 0 or s = S. With symmetric limits, one xi and
    eta = 1 this is ``min(P_max, S/(xi dt))``.
    """
    def width(s):
        return spec.discharge_limit(s, dt) - spec.charge_limit(s, dt)
    return min(width(0.0), width(spec.capacity))


@dataclass
class FeasibilityReport:
    bound: float
    symmetric_form_bound: float
    symmetric_limits: bool
    horizon_sum: float  # max_k e_max - min_k l_min
    stage_sum: list  # e_k^max - l_k^min
    stage_gap: list  # (l_k^max + e_k^max) - (e_k^min + l_k^min)
    tiers: dict = field(default_factory=dict)
    verdict: str = ""
    guaranteed: bool = False
    worst_stage: Optional[int] = None
    worst_margin: float = 0.0

    @property
    def passed(self) -> bool:
        return self.guaranteed

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def summary(self) -> str:
        lines = [f"bound min-width over states: {self.bound:.6g} kW"
                 f" (symmetric form min(P_max, S/(xi dt)) = {self.symmetric_form_bound:.6g},"
                 f" symmetric limits: {self.symmetric_limits})"]
        names = {"i": "horizon max(e_max) - min(l_min)",
                 "ii": "per-stage e_max - l_min",
                 "iii": "per-stage demand-supply gap"}
        for key in ("i", "ii", "iii"):
            lines.append(f"tier ({key}) {names[key]}: {'PASS' if self.tiers[key] else 'FAIL'}")
        lines.append(f"verdict: {self.verdict}; worst stage {self.worst_stage} "
                     f"margin {self.worst_margin:.6g} kW")
        return "\n".join(lines)


def check_configuration_feasibility(e_min: Sequence[float], e_max: Sequence[float],
                                    l_min: Sequence[float], l_max: Sequence[float],
                                    dt: float, spec: BatterySpec) -> FeasibilityReport:
    """Evaluate the three progressively weaker sufficiency tiers.

    Arguments are per-stage model bounds. The verdict is the strongest tier
    that holds (``TIER_I`` > ``TIER_II`` > ``TIER_III``) or
    ``INFEASIBLE-CONFIG``.
    """
    e_min, e_max = np.asarray(e_min, float), np.asarray(e_max, float)
    l_min, l_max = np.asarray(l_min, float), np.asarray(l_max, float)
    bound = width_bound(dt, spec)
    xi = max(spec.xi_charge, spec.xi_discharge)
    sym_bound = min(spec.p_max, spec.capacity / (xi * dt))

    horizon_sum = float(e_max.max() - l_min.min())
    stage_sum = e_max - l_min
    stage_gap = (l_max + e_max) - (e_min + l_min)
    tiers = {
        "i": bool(horizon_sum <= bound + EMPTY_TOL),
        "ii": bool(np.all(stage_sum <= bound + EMPTY_TOL)),
        "iii": bool(np.all(stage_gap <= bound + EMPTY_TOL)),
    }
    margins = bound - stage_gap
    worst = int(np.argmin(margins))
    if tiers["i"]:
        verdict = "TIER_I"
    elif tiers["ii"]:
        verdict = "TIER_II"
    elif tiers["iii"]:
        verdict = "TIER_III"
    else:
        verdict = "INFEASIBLE-CONFIG"
    return FeasibilityReport(
        bound=bound, symmetric_form_bound=sym_bound, symmetric_limits=spec.symmetric,
        horizon_sum=horizon_sum, stage_sum=stage_sum.tolist(), stage_gap=stage_gap.tolist(),
        tiers=tiers, verdict=verdict, guaranteed=verdict != "INFEASIBLE-CONFIG",
        worst_stage=worst, worst_margin=float(margins[worst]))
