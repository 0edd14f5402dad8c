"""Near-optimal battery energy management for a grid-connected nanogrid.

Stochastic PV/load models, feasible-decision-space constraints, a
backward-induction solver over a quantized battery state, heuristic
policies and a Monte Carlo evaluator.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ConfigurationError,
    ConstraintViolation,
    EmptyDatasetError,
    InfeasibleConfigurationError,
    InfeasibleTransitionError,
    TimeGrid,
    build_time_grid,
    hour_of_day,
)
from .economics import PricingSchedule  # noqa: E402
from .policies import Decision, Policy1, Policy2  # noqa: E402
from .scenario import Scenario, load_scenario  # noqa: E402
from .simulator import compare_policies, monte_carlo, rollout  # noqa: E402
from .solver import OptimalPolicy, ValueTable, build_state_grid, solve_backward  # noqa: E402
from .stochastic import CyclostationaryModel, EmpiricalDistribution  # noqa: E402
from .storage import BatterySpec, Interval  # noqa: E402

__all__ = [
    "BatterySpec", "ConfigurationError", "ConstraintViolation", "CyclostationaryModel",
    "Decision", "EmpiricalDistribution", "EmptyDatasetError", "InfeasibleConfigurationError",
    "InfeasibleTransitionError", "Interval", "OptimalPolicy", "Policy1", "Policy2",
    "PricingSchedule", "Scenario", "TimeGrid", "ValueTable", "build_state_grid",
    "build_time_grid", "compare_policies", "hour_of_day", "load_scenario", "monte_carlo",
    "rollout", "solve_backward",
]
