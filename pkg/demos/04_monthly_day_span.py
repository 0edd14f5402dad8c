"""
A month of operation from a one-day solve
=========================================

Over a 30-day horizon the models repeat every 24 hours, so one day can be
solved and its table reused every day. The terminal penalty then applies at
each midnight, which keeps the battery topped up overnight.
"""

import dataclasses

from nanogrid.core import build_time_grid
from nanogrid.policies import Policy1, Policy2
from nanogrid.reference import reference_scenario
from nanogrid.simulator import compare_policies
from nanogrid.solver import OptimalPolicy, build_state_grid, solve_backward

day = reference_scenario()
month = dataclasses.replace(day, grid=build_time_grid(0, 30 * 86400, 3600))
print(f"{month.N} stages, feasibility {month.feasibility().verdict}")

grid = build_state_grid(month.battery, 101)
day_table = solve_backward(month, grid, 101, span="day")
full_table = solve_backward(month, grid, 101, span="full")

policies = [Policy1(), Policy2(3), OptimalPolicy(day_table), OptimalPolicy(full_table)]
comparison = compare_policies(policies, month, n_rollouts=100, seed=1)
labels = {"optimal": "optimal (day)", "optimal#2": "optimal (full)"}
for name, r in comparison.reports.items():
    print(f"{labels.get(name, name):>15}: monthly J1 {r.mean_j1:+8.3f} $ +/- {r.ci95:.3f}")
