"""Exhaustive reference for small instances, used to check the solver.

Every stage/state value is computed by a top-down recursion that, for each
candidate decision, enumerates every PV/load realization, follows the
battery transition and values the successor by interpolating the recursive
values of the two bracketing grid states. It uses plain Python scalars and
its own copies of the constraint, cost and interpolation formulas so that it
shares no code path with the vectorized solver. Results are memoized per
(stage, grid index); the work guard counts realization evaluations.
"""
from __future__ import annotations

import bisect
import math

import numpy as np

from .scenario import Scenario
from .solver import StateGrid, ValueTable

MAX_EVALUATIONS = 10_000_000


class OracleTooLarge(RuntimeError):
    pass


def _candidates(lo: float, hi: float, n: int) -> list:
    if hi <= lo:
        return [lo]
    n = max(n, 2)
    out = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    out[-1] = hi
    if lo < 0 < hi and 0.0 not in out:
        out.append(0.0)
    return out


def brute_force_oracle(scenario: Scenario, grid: StateGrid, n_decisions: int) -> ValueTable:
    spec = scenario.battery
    dt = scenario.dt
    pts = [float(x) for x in grid.points]
    N = scenario.N
    hours = [int(h) for h in scenario.hours]

    stage_data = []
    for k in range(N):
        pv = scenario.pv.at_hour(hours[k])
        ld = scenario.load.at_hour(hours[k])
        stage_data.append((pv, ld))
    work = sum(len(pts) * (n_decisions + 1) * len(pv.support) * len(ld.support)
               for pv, ld in stage_data)
    if work > MAX_EVALUATIONS:
        raise OracleTooLarge(f"{work} evaluations exceed the oracle limit {MAX_EVALUATIONS}")

    c_s_N = scenario.pricing.sell[hours[N]]
    memo = {}

    def interp(k1: int, s: float) -> float:
        s = min(max(s, pts[0]), pts[-1])
        i = bisect.bisect_right(pts, s) - 1
        if i >= len(pts) - 1:
            return value(k1, len(pts) - 1)
        w = (s - pts[i]) / (pts[i + 1] - pts[i])
        if w == 0.0:
            return value(k1, i)
        return (1 - w) * value(k1, i) + w * value(k1, i + 1)

    def value(k: int, j: int) -> float:
        key = (k, j)
        if key in memo:
            return memo[key]
        s = pts[j]
        if k == N:
            out = scenario.terminal_multiplier * (spec.capacity - s) * c_s_N
            memo[key] = out
            return out
        pv, ld = stage_data[k]
        v_hi = min(spec.p_max, spec.eta_s * s / (spec.xi_discharge * dt))
        v_lo = max(spec.p_min, -(spec.capacity - spec.eta_s * s) / (spec.xi_charge * dt))
        lo = -v_hi - ld.support[0] - pv.support[0]
        hi = -v_lo - ld.support[-1] - pv.support[-1]
        if hi < lo <= hi + 1e-9:
            lo = hi = 0.5 * (lo + hi)
        if lo > hi:
            raise RuntimeError(f"oracle: empty admissible set at stage {k}, state {s}")
        h = hours[k]
        best = math.inf
        best_u = None
        for u in _candidates(lo, hi, n_decisions):
            price = scenario.pricing.buy[h] if u > 0 else scenario.pricing.sell[h]
            total = price * u * dt
            for e, pe in zip(pv.support, pv.probs):
                for l, pl in zip(ld.support, ld.probs):
                    v = -(u + e + l)
                    xi = spec.xi_discharge if v > 0 else spec.xi_charge
                    s_next = spec.eta_s * s - xi * v * dt
                    total += pe * pl * interp(k + 1, s_next)
            if total < best:
                best, best_u = total, u
        memo[key] = best
        decisions[key] = best_u
        return best

    decisions = {}
    V = np.empty((N + 1, len(pts)))
    U = np.empty((N, len(pts)))
    for k in range(N + 1):
        for j in range(len(pts)):
            V[k, j] = value(k, j)
            if k < N:
                U[k, j] = decisions[(k, j)]
    return ValueTable(grid, V, U, "full", n_decisions)
