import functools

import numpy as np
import pytest

from nanogrid.core import build_time_grid
from nanogrid.economics import PricingSchedule
from nanogrid.reference import reference_scenario
from nanogrid.scenario import Scenario
from nanogrid.stochastic import CyclostationaryModel, EmpiricalDistribution
from nanogrid.storage import BatterySpec


def constant_scenario(pv=0.0, load=-1.0, capacity=6.4, p=5.0, s0=3.8, N=24, m=0.0,
                      buy=0.2, sell=0.1, start_hour=0, spec=None):
    """Scenario with singleton PV/load and flat prices."""
    spec = spec or BatterySpec(capacity, -p, p)
    pv_m = CyclostationaryModel.constant(EmpiricalDistribution.singleton(pv))
    ld_m = CyclostationaryModel.constant(EmpiricalDistribution.singleton(load))
    grid = build_time_grid(start_hour * 3600, (start_hour + N) * 3600, 3600)
    return Scenario(grid, spec, PricingSchedule.flat(buy, sell), pv_m, ld_m, m, s0)


def random_dist(rng, lo, hi, max_support=3):
    n = int(rng.integers(1, max_support + 1))
    support = np.unique(np.round(rng.uniform(lo, hi, n), 3))
    probs = rng.dirichlet(np.ones(len(support)))
    return EmpiricalDistribution.from_weighted(support, probs)


def random_small_scenario(rng, max_N=4, max_support=3):
    """A random instance whose per-stage spread fits the battery band (tier ii)."""
    capacity = float(rng.uniform(2.0, 8.0))
    p_max = float(rng.uniform(1.5, 5.0))
    p_min = -float(rng.uniform(1.5, 5.0))
    spec = BatterySpec(capacity, p_min, p_max,
                       eta_s=float(rng.uniform(0.9, 1.0)),
                       xi_charge=float(rng.uniform(0.85, 1.0)),
                       xi_discharge=float(rng.uniform(1.0, 1.15)))
    N = int(rng.integers(1, max_N + 1))
    start = int(rng.integers(0, 24))
    # keep e_max - l_min comfortably inside the smallest band width
    from nanogrid.storage import width_bound
    budget = 0.9 * width_bound(1.0, spec)
    by_pv, by_load = [], []
    for _ in range(24):
        e_hi = float(rng.uniform(0.0, budget / 2))
        by_pv.append(random_dist(rng, 0.0, e_hi, max_support))
        l_lo = -float(rng.uniform(0.0, budget / 2))
        by_load.append(random_dist(rng, l_lo, 0.0, max_support))
    buy = tuple(float(x) for x in rng.uniform(0.05, 0.4, 24))
    sell = tuple(float(x) for x in rng.uniform(0.0, 0.3, 24))
    grid = build_time_grid(start * 3600, (start + N) * 3600, 3600)
    s0 = float(rng.uniform(0, capacity))
    return Scenario(grid, spec, PricingSchedule(buy, sell), CyclostationaryModel(tuple(by_pv)),
                    CyclostationaryModel(tuple(by_load)), float(rng.uniform(0, 5)), s0)


@functools.lru_cache(maxsize=None)
def _reference():
    return reference_scenario()


@pytest.fixture(scope="session")
def ref_scenario():
    return _reference()


# acceptance lines registered by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
