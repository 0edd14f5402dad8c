"""Monte Carlo rollouts of policies against sampled PV/load realizations."""
from __future__ import annotations

import csv
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import ConstraintViolation, InfeasibleTransitionError
from .economics import monetary_terminal, stage_cost, terminal_cost
from .policies import Policy
from .scenario import Scenario
from .stochastic import sample_path
from .storage import step_battery

BALANCE_TOL = 1e-9  # kW
POWER_TOL = 1e-9  # kW
Z95 = 1.959963984540054


@dataclass
class Trajectory:
    policy: str
    s: np.ndarray  # N+1 states
    e: np.ndarray
    l: np.ndarray
    u: np.ndarray
    v: np.ndarray
    stage_cost: np.ndarray
    g1: float
    g: float

    @property
    def s_N(self) -> float:
        return float(self.s[-1])

    @property
    def j1(self) -> float:
        return math.fsum(self.stage_cost) + self.g1

    @property
    def j(self) -> float:
        return math.fsum(self.stage_cost) + self.g

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "s_kwh", "e_kw", "l_kw", "u_kw", "v_kw", "stage_cost_usd"])
            for k in range(len(self.u)):
                w.writerow([k, repr(float(self.s[k])), repr(float(self.e[k])),
                            repr(float(self.l[k])), repr(float(self.u[k])),
                            repr(float(self.v[k])), repr(float(self.stage_cost[k]))])


def realization_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def sample_realizations(scenario: Scenario, rng: np.random.Generator) -> tuple:
    """PV and load paths for stages 0..N-1 (PV drawn first, then load)."""
    hours = scenario.hours[:scenario.N]
    return sample_path(scenario.pv, hours, rng), sample_path(scenario.load, hours, rng)


def rollout(policy: Policy, scenario: Scenario, seed: int = 0, index: int = 0,
            realizations: Optional[tuple] = None) -> Trajectory:
    """Run ``policy`` over the horizon on one sampled realization path.

    The realization stream depends only on ``(seed, index)``, never on the
    policy, so different policies see identical PV/load paths.
    """
    if realizations is None:
        realizations = sample_realizations(scenario, realization_rng(seed, index))
    e_path, l_path = realizations
    N, dt, spec = scenario.N, scenario.dt, scenario.battery
    s = np.empty(N + 1)
    u = np.empty(N)
    v = np.empty(N)
    cost = np.empty(N)
    s[0] = scenario.s0
    for k in range(N):
        e, l = float(e_path[k]), float(l_path[k])
        d = policy.decide(k, float(s[k]), e, l, scenario)
        residual = e + d.u + d.v + l
        if abs(residual) > BALANCE_TOL or not (spec.p_min - POWER_TOL <= d.v <= spec.p_max + POWER_TOL):
            raise ConstraintViolation(
                f"{policy.name} stage {k} (seed {seed}, rollout {index}): s={s[k]!r}, "
                f"e={e!r}, l={l!r}, u={d.u!r}, v={d.v!r}, balance residual {residual!r}")
        try:
            s[k + 1] = step_battery(float(s[k]), d.v, dt, spec)
        except InfeasibleTransitionError as exc:
            raise ConstraintViolation(
                f"{policy.name} stage {k} (seed {seed}, rollout {index}): {exc}; "
                f"e={e!r}, l={l!r}, u={d.u!r}") from exc
        u[k], v[k] = d.u, d.v
        cost[k] = stage_cost(d.u, int(scenario.hours[k]), scenario.pricing, dt)
    hour_N = int(scenario.hours[N])
    g1 = monetary_terminal(s[N], hour_N, scenario.pricing)
    g = terminal_cost(s[N], scenario.terminal_multiplier, spec, scenario.pricing, hour_N)
    return Trajectory(policy.name, s, np.asarray(e_path, float), np.asarray(l_path, float),
                      u, v, cost, float(g1), float(g))


def realized_cost_to_go(traj: Trajectory) -> np.ndarray:
    """Suffix sums of stage costs plus the monetary terminal value.

    Element k is the realized cost from stage k to the end; the extra final
    element (index N) is the terminal value alone.
    """
    tail = np.cumsum(traj.stage_cost[::-1])[::-1]
    return np.append(tail + traj.g1, traj.g1)


@dataclass
class PolicyReport:
    policy: str
    n: int
    mean_j1: float
    std_j1: float
    ci95: float
    mean_j: float
    mean_terminal_soc: float
    violations: int = 0
    mean_cost_to_go: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"mean_j1": self.mean_j1, "std_j1": self.std_j1, "ci95": self.ci95,
                "mean_terminal_soc": self.mean_terminal_soc, "n": self.n,
                "mean_j": self.mean_j, "violations": self.violations}


def _summarize(name: str, trajs: Sequence[Trajectory]) -> PolicyReport:
    j1 = np.array([t.j1 for t in trajs])
    n = len(j1)
    # exact-rational stdev: identical rollouts give exactly zero spread
    std = statistics.stdev(j1.tolist()) if n > 1 else 0.0
    ctg = np.mean([realized_cost_to_go(t) for t in trajs], axis=0)
    return PolicyReport(
        policy=name, n=n, mean_j1=statistics.fmean(j1.tolist()), std_j1=std,
        ci95=Z95 * std / math.sqrt(n),
        mean_j=float(np.mean([t.j for t in trajs])),
        mean_terminal_soc=float(np.mean([t.s_N for t in trajs])),
        mean_cost_to_go=ctg.tolist())


def run_rollouts(policy: Policy, scenario: Scenario, n_rollouts: int, seed: int,
                 workers: int = 1) -> list:
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")

    def one(i):
        return rollout(policy, scenario, seed, i)

    if workers <= 1:
        return [one(i) for i in range(n_rollouts)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_rollouts)))


def monte_carlo(policy: Policy, scenario: Scenario, n_rollouts: int, seed: int,
                workers: int = 1) -> PolicyReport:
    """J1 statistics over ``n_rollouts`` independent seeded rollouts."""
    return _summarize(policy.name, run_rollouts(policy, scenario, n_rollouts, seed, workers))


@dataclass
class Comparison:
    seed: int
    n_rollouts: int
    reports: dict  # policy name -> PolicyReport
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_rollouts": self.n_rollouts,
            **self.extra,
            "policies": {name: r.summary() for name, r in self.reports.items()},
            "mean_cost_to_go": {name: r.mean_cost_to_go for name, r in self.reports.items()},
        }

    def write(self, out_dir, stem: str = "report") -> None:
        out_dir = Path(out_dir)
        (out_dir / f"{stem}.json").write_text(json.dumps(self.to_dict(), indent=1) + "\n")
        names = list(self.reports)
        with open(out_dir / f"{stem}_summary.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["policy", "mean_j1", "std_j1", "ci95", "mean_terminal_soc", "n"])
            for name in names:
                r = self.reports[name]
                w.writerow([name, repr(r.mean_j1), repr(r.std_j1), repr(r.ci95),
                            repr(r.mean_terminal_soc), r.n])
        with open(out_dir / f"{stem}_cost_to_go.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k"] + names)
            n_rows = len(self.reports[names[0]].mean_cost_to_go)
            for k in range(n_rows):
                w.writerow([k] + [repr(self.reports[nm].mean_cost_to_go[k]) for nm in names])


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())


def compare_policies(policies: Sequence[Policy], scenario: Scenario, n_rollouts: int,
                     seed: int, workers: int = 1) -> Comparison:
    """Evaluate each policy on the same realization streams (common random numbers)."""
    if len(policies) < 2:
        raise ValueError("compare needs at least two policies")
    reports = {}
    for p in policies:
        label, i = p.name, 2
        while label in reports:
            label, i = f"{p.name}#{i}", i + 1
        reports[label] = monte_carlo(p, scenario, n_rollouts, seed, workers)
    return Comparison(seed, n_rollouts, reports)
