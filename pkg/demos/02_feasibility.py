"""
Is the decision space ever empty?
=================================

The solver only considers grid decisions that keep the battery inside its
power and energy limits for every possible PV/load realization. This demo
evaluates the sufficiency tiers for the reference battery and then shrinks
the power rating until no tier holds.
"""

import dataclasses

import numpy as np

from nanogrid.reference import reference_scenario
from nanogrid.storage import BatterySpec, determinable_bounds

scenario = reference_scenario()
print(scenario.feasibility().summary())

# Shrink the power rating and watch the verdict change.
e_min, e_max, l_min, l_max = (b[:scenario.N] for b in scenario.stage_bounds)
for p in (5.0, 4.0, 3.0, 2.0, 1.0):
    spec = BatterySpec(6.4, -p, p)
    rep = dataclasses.replace(scenario, battery=spec).feasibility()
    # count empty points on a state sweep at every stage
    s = np.linspace(0, 6.4, 1000)[None, :]
    lo, hi = determinable_bounds(s, e_min[:, None], e_max[:, None], l_min[:, None],
                                 l_max[:, None], scenario.dt, spec)
    print(f"p = {p:.1f} kW: {rep.verdict:17} worst stage {rep.worst_stage:2d}, "
          f"empty sweep points {int(np.sum(lo > hi))}")
