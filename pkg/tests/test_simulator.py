import csv
import math

import numpy as np
import pytest

from conftest import constant_scenario
from nanogrid.core import ConstraintViolation
from nanogrid.policies import Decision, Policy, Policy1, Policy2
from nanogrid.simulator import (
    PolicyReport,
    Trajectory,
    compare_policies,
    monte_carlo,
    read_report,
    realized_cost_to_go,
    rollout,
)
from nanogrid.storage import BatterySpec


def test_singleton_rollout_independent_of_seed():
    sc = constant_scenario(pv=1.0, load=-2.0)
    a, b = rollout(Policy1(), sc, seed=1), rollout(Policy1(), sc, seed=99)
    assert a.s.tolist() == b.s.tolist() and a.u.tolist() == b.u.tolist()


def test_same_seed_same_trajectory(ref_scenario):
    a = rollout(Policy2(), ref_scenario, 5, 3)
    b = rollout(Policy2(), ref_scenario, 5, 3)
    for f in ("s", "e", "l", "u", "v", "stage_cost"):
        assert getattr(a, f).tobytes() == getattr(b, f).tobytes()


def test_policy1_drains_then_buys():
    spec = BatterySpec(20.0, -5.0, 5.0)
    sc = constant_scenario(pv=0.0, load=-1.0, spec=spec, s0=3.8, N=24)
    t = rollout(Policy1(), sc)
    assert t.v[:3] == pytest.approx([1, 1, 1])
    assert t.v[3] == pytest.approx(0.8) and t.u[3] == pytest.approx(0.2)
    assert np.all(t.v[4:] == 0) and np.all(t.u[4:] == 1)
    assert t.s_N == 0


def test_monte_carlo_singletons_have_zero_spread():
    sc = constant_scenario(pv=1.0, load=-2.0)
    r = monte_carlo(Policy1(), sc, 20, seed=0)
    assert r.std_j1 == 0 and r.ci95 == 0


def test_monte_carlo_single_rollout(ref_scenario):
    r = monte_carlo(Policy2(), ref_scenario, 1, seed=4)
    assert r.mean_j1 == rollout(Policy2(), ref_scenario, 4, 0).j1


def test_ci_shrinks_with_root_n(ref_scenario):
    a = monte_carlo(Policy1(), ref_scenario, 1000, seed=3)
    b = monte_carlo(Policy1(), ref_scenario, 2000, seed=3)
    ratio = b.ci95 / a.ci95
    assert 0.8 / math.sqrt(2) <= ratio <= 1.2 / math.sqrt(2)


def test_threads_do_not_change_results(ref_scenario):
    a = monte_carlo(Policy2(), ref_scenario, 64, seed=2, workers=1)
    b = monte_carlo(Policy2(), ref_scenario, 64, seed=2, workers=4)
    assert a == b


def _traj(costs, g1):
    n = len(costs)
    z = np.zeros(n)
    return Trajectory("x", np.zeros(n + 1), z, z, z, z, np.asarray(costs, float), g1, 0.0)


def test_realized_cost_to_go_examples():
    assert realized_cost_to_go(_traj([0, 0, 0], 0.0)).tolist() == [0, 0, 0, 0]
    assert realized_cost_to_go(_traj([1, 2], -0.5)).tolist() == [2.5, 1.5, -0.5]
    t = _traj([0.3, 0.7, 1.1], -0.2)
    ctg = realized_cost_to_go(t)
    assert ctg[-2] == pytest.approx(1.1 - 0.2)
    assert ctg[0] == pytest.approx(t.j1)


def test_common_random_numbers(ref_scenario):
    a = rollout(Policy1(), ref_scenario, 7, 11)
    b = rollout(Policy2(), ref_scenario, 7, 11)
    assert a.e.tobytes() == b.e.tobytes() and a.l.tobytes() == b.l.tobytes()


def test_compare_with_itself_gives_identical_rows(ref_scenario):
    c = compare_policies([Policy2(), Policy2()], ref_scenario, 50, seed=1)
    rows = list(c.reports.values())
    assert list(c.reports) == ["policy2", "policy2#2"]
    assert rows[0].summary() == rows[1].summary()
    with pytest.raises(ValueError):
        compare_policies([Policy1()], ref_scenario, 5, 0)


def test_export_round_trip(tmp_path, ref_scenario):
    c = compare_policies([Policy1(), Policy2()], ref_scenario, 30, seed=2)
    c.write(tmp_path)
    back = read_report(tmp_path / "report.json")
    for name, r in c.reports.items():
        assert back["policies"][name] == r.summary()
        assert back["mean_cost_to_go"][name] == r.mean_cost_to_go
    with open(tmp_path / "report_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["mean_j1"]) for r in rows] == [r.mean_j1 for r in c.reports.values()]
    with open(tmp_path / "report_cost_to_go.csv") as fh:
        ctg = list(csv.reader(fh))
    assert len(ctg) == ref_scenario.N + 2


def test_trajectory_csv(tmp_path, ref_scenario):
    t = rollout(Policy1(), ref_scenario, 0, 0)
    t.write_csv(tmp_path / "t.csv")
    with open(tmp_path / "t.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "s_kwh", "e_kw", "l_kw", "u_kw", "v_kw", "stage_cost_usd"]
    assert [float(x) for x in rows[5][1:]] == [t.s[4], t.e[4], t.l[4], t.u[4], t.v[4],
                                                t.stage_cost[4]]


class Overdraw(Policy):
    name = "overdraw"

    def decide(self, k, s, e, l, scenario):
        v = s + 1.0
        return Decision(-(v + e + l), v)


class Unbalanced(Policy):
    name = "unbalanced"

    def decide(self, k, s, e, l, scenario):
        return Decision(0.0, 0.0 if e + l else 0.1)


def test_violations_raise_with_state_dump():
    sc = constant_scenario(pv=0.0, load=-1.0)
    with pytest.raises(ConstraintViolation, match="overdraw stage 0.*s=3.8"):
        rollout(Overdraw(), sc)
    with pytest.raises(ConstraintViolation, match="balance residual"):
        rollout(Unbalanced(), constant_scenario(pv=1.0, load=-1.0))


def test_reports_both_metrics(ref_scenario):
    r = monte_carlo(Policy1(), ref_scenario, 10, seed=0)
    assert isinstance(r, PolicyReport)
    assert r.mean_j != r.mean_j1 and r.violations == 0
