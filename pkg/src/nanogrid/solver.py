"""Backward-induction solver over a quantized battery state.

Values at off-grid successor states come from linear interpolation of the
next-stage value row. Decisions are searched over a uniform candidate set
spanning the determinable feasible decision space (plus u = 0 when inside),
which keeps every realization's transition inside [0, capacity].
"""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ConfigurationError, InfeasibleConfigurationError
from .economics import stage_cost_array, terminal_cost
from .policies import Decision, Policy
from .scenario import Scenario
from .storage import (
    STATE_TOL,
    BatterySpec,
    check_state,
    determinable_bounds,
    feasible_decision_space,
    next_state,
)

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


@dataclass(frozen=True)
class StateGrid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or len(pts) < 2:
            raise ValueError("state grid needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("state grid must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def nearest(self, s: float) -> int:
        """Index of the nearest grid point; ties go to the lower index."""
        pts = self.points
        i = int(np.searchsorted(pts, s))
        if i <= 0:
            return 0
        if i >= len(pts):
            return len(pts) - 1
        return i - 1 if s - pts[i - 1] <= pts[i] - s else i


def build_state_grid(spec: BatterySpec, n_states: int) -> StateGrid:
    if n_states < 2:
        raise ValueError("need at least 2 grid states")
    return StateGrid(np.linspace(0.0, spec.capacity, n_states))


@dataclass(frozen=True)
class ValueTable:
    """Optimal cost-to-go ``V`` (N+1 x N_s) and grid decisions ``U_star`` (N x N_s)."""

    grid: StateGrid
    V: np.ndarray
    U_star: np.ndarray
    span: str = "full"
    n_decisions: int = 0

    @property
    def n_stages(self) -> int:
        return self.U_star.shape[0]

    def value(self, k: int, s: float) -> float:
        return interpolate_value(self.V[k], self.grid, s)

    def to_dict(self) -> dict:
        return {
            "span": self.span,
            "n_decisions": self.n_decisions,
            "grid": self.grid.points.tolist(),
            "V": self.V.tolist(),
            "U_star": self.U_star.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ValueTable":
        return cls(StateGrid(np.array(d["grid"], dtype=float)),
                   np.array(d["V"], dtype=float), np.array(d["U_star"], dtype=float),
                   d.get("span", "full"), int(d.get("n_decisions", 0)))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "ValueTable":
        return cls.from_dict(json.loads(Path(path).read_text()))


def interpolate_value(V_row, grid: StateGrid, s):
    """Piecewise-linear value between bracketing grid points."""
    pts = grid.points
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < pts[0] - STATE_TOL) or np.any(s_arr > pts[-1] + STATE_TOL):
        raise ValueError(f"state {s} outside grid range [{pts[0]}, {pts[-1]}]")
    out = np.interp(s_arr, pts, V_row)
    return float(out) if out.ndim == 0 else out


def terminal_row(scenario: Scenario, grid: StateGrid) -> np.ndarray:
    hour_N = int(scenario.hours[scenario.N])
    return np.array([terminal_cost(s, scenario.terminal_multiplier, scenario.battery,
                                   scenario.pricing, hour_N) for s in grid.points])


def _stage_arrays(scenario: Scenario, k: int):
    h = int(scenario.hours[k])
    pv, load = scenario.pv.at_hour(h), scenario.load.at_hour(h)
    e = np.asarray(pv.support)
    l = np.asarray(load.support)
    joint = np.outer(pv.probs, load.probs)
    return h, e, l, joint


def _expected_values(s: float, u: np.ndarray, e, l, joint, V_next, grid: StateGrid,
                     scenario: Scenario) -> np.ndarray:
    v = -(u[:, None, None] + e[None, :, None] + l[None, None, :])
    s_next = check_state(next_state(s, v, scenario.dt, scenario.battery), scenario.battery)
    vals = np.interp(s_next, grid.points, V_next)
    return np.einsum("cij,ij->c", vals, joint)


def expected_next_value(k: int, s: float, u: float, V_next, scenario: Scenario,
                        grid: StateGrid) -> float:
    """E[V_{k+1}(s_{k+1})] over the joint PV/load distribution at stage k."""
    _, e, l, joint = _stage_arrays(scenario, k)
    return float(_expected_values(s, np.array([float(u)]), e, l, joint,
                                  np.asarray(V_next, float), grid, scenario)[0])


def candidate_decisions(lo: float, hi: float, n_decisions: int) -> np.ndarray:
    """Uniform candidates on [lo, hi] with both endpoints, plus 0 when interior."""
    if hi <= lo:
        return np.array([lo])
    u = np.linspace(lo, hi, max(n_decisions, 2))
    if lo < 0 < hi and not np.any(u == 0.0):
        u = np.sort(np.append(u, 0.0))
    return u


def _argmin_tiebreak(cost: np.ndarray, u: np.ndarray) -> int:
    best = cost.min()
    near = np.flatnonzero(cost <= best + TIE_TOL * max(1.0, abs(best)))
    if len(near) == 1:
        return int(near[0])
    # smaller |u| first, then smaller u
    order = np.lexsort((u[near], np.abs(u[near])))
    return int(near[order[0]])


def bellman_backup(k: int, V_next, scenario: Scenario, grid: StateGrid,
                   n_decisions: int) -> tuple:
    """One Bellman step: returns the value row and argmin decisions at stage k."""
    h, e, l, joint = _stage_arrays(scenario, k)
    V_next = np.asarray(V_next, dtype=float)
    lo, hi = determinable_bounds(grid.points, e[0], e[-1], l[0], l[-1],
                                 scenario.dt, scenario.battery)
    V_row = np.empty(len(grid))
    U_row = np.empty(len(grid))
    for j, s in enumerate(grid.points):
        if lo[j] > hi[j]:
            raise InfeasibleConfigurationError(
                f"empty admissible decision space at stage {k}, state {s:.6g} kWh "
                f"([{lo[j]:.6g}, {hi[j]:.6g}]); run the configuration feasibility check")
        u = candidate_decisions(lo[j], hi[j], n_decisions)
        cost = stage_cost_array(u, h, scenario.pricing, scenario.dt)
        cost = cost + _expected_values(s, u, e, l, joint, V_next, grid, scenario)
        i = _argmin_tiebreak(cost, u)
        V_row[j] = cost.min()
        U_row[j] = u[i]
    return V_row, U_row


def day_scenario(scenario: Scenario) -> Scenario:
    """The one-day sub-problem starting at the scenario's t0."""
    steps = scenario.grid.steps_per_day
    if steps != int(steps) or scenario.N % int(steps):
        raise ConfigurationError(
            f"day span needs a whole number of days; N={scenario.N}, steps/day={steps}")
    grid = dataclasses.replace(scenario.grid, N=int(steps))
    return dataclasses.replace(scenario, grid=grid)


def solve_backward(scenario: Scenario, grid: StateGrid, n_decisions: int = 101,
                   span: str = "full", force: bool = False) -> ValueTable:
    """Fill the value table from the terminal stage back to stage 0.

    ``span="day"`` solves one day and reuses it for every day of the
    horizon. Configurations failing every sufficiency tier are refused
    unless ``force`` is set.
    """
    if span not in ("full", "day"):
        raise ValueError(f"unknown span {span!r}")
    problem = day_scenario(scenario) if span == "day" else scenario
    if not force:
        report = problem.feasibility()
        if not report.guaranteed:
            raise InfeasibleConfigurationError(
                f"configuration fails every sufficiency tier (worst stage "
                f"{report.worst_stage}, margin {report.worst_margin:.6g} kW); "
                "pass force to solve anyway")
    N = problem.N
    V = np.empty((N + 1, len(grid)))
    U = np.empty((N, len(grid)))
    V[N] = terminal_row(problem, grid)
    for k in range(N - 1, -1, -1):
        V[k], U[k] = bellman_backup(k, V[k + 1], problem, grid, n_decisions)
    logger.debug("solved %d stages on %d states", N, len(grid))
    return ValueTable(grid, V, U, span, n_decisions)


def near_optimal_decide(k: int, s: float, e: float, l: float, table: ValueTable,
                        scenario: Scenario) -> Decision:
    """Table decision at the nearest grid state, projected onto this realization's
    feasible space; the battery absorbs the realized imbalance."""
    stage = k % table.n_stages if table.span == "day" else k
    u = float(table.U_star[stage, table.grid.nearest(s)])
    u = feasible_decision_space(s, e, l, scenario.dt, scenario.battery).project(u)
    return Decision(u, -(u + e + l))


class OptimalPolicy(Policy):
    name = "optimal"

    def __init__(self, table: ValueTable):
        self.table = table

    def decide(self, k, s, e, l, scenario):
        return near_optimal_decide(k, s, e, l, self.table, scenario)
