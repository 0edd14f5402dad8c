"""
Near-optimal control against two heuristics
===========================================

Backward induction over a 101-point battery grid gives a table of
cost-to-go values and grid decisions. The table policy is then rolled out
against the two rule-based policies on identical random PV/load paths.
"""

import numpy as np

from nanogrid.policies import Policy1, Policy2
from nanogrid.reference import reference_scenario
from nanogrid.simulator import compare_policies
from nanogrid.solver import OptimalPolicy, build_state_grid, solve_backward

scenario = reference_scenario(s0=3.8)
table = solve_backward(scenario, build_state_grid(scenario.battery, 101), 101)
print(f"V_0(3.8 kWh) = {table.value(0, 3.8):+.4f} $")

# Hours where a full battery sells to the grid.
selling = [int(h) for h, u in zip(scenario.hours, table.U_star[:, -1]) if u < 0]
print("full battery sells in hours", selling)

comparison = compare_policies([Policy1(), Policy2(3), OptimalPolicy(table)],
                              scenario, n_rollouts=1000, seed=7)
for name, r in comparison.reports.items():
    print(f"{name:>8}: J1 {r.mean_j1:+.4f} $ +/- {r.ci95:.4f}, "
          f"terminal SOC {r.mean_terminal_soc:.2f} kWh")

# Mean realized cost-to-go at a few stages.
ctg = {n: np.asarray(r.mean_cost_to_go) for n, r in comparison.reports.items()}
print("\nstage " + "".join(f"{n:>10}" for n in ctg))
for k in range(0, 25, 4):
    print(f"{k:5d} " + "".join(f"{c[k]:+10.3f}" for c in ctg.values()))
