"""Acceptance gate: one PASS/FAIL line per criterion.

Lines are printed as each check finishes and repeated in the pytest
terminal summary. Run standalone with ``python tests/test_acceptance.py``.
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES, random_small_scenario  # noqa: E402

from nanogrid.cli import main  # noqa: E402
from nanogrid.oracle import brute_force_oracle  # noqa: E402
from nanogrid.policies import Policy1, Policy2  # noqa: E402
from nanogrid.reference import (  # noqa: E402
    reference_scenario,
    sell_peak_scenario,
    write_reference_inputs,
)
from nanogrid.simulator import BALANCE_TOL, compare_policies, monte_carlo, rollout  # noqa: E402
from nanogrid.solver import OptimalPolicy, build_state_grid, solve_backward  # noqa: E402
from nanogrid.stochastic import (  # noqa: E402
    PvPlant,
    WeatherRecord,
    build_pv_model,
    rms_accuracy,
)
from nanogrid.storage import (  # noqa: E402
    BatterySpec,
    check_configuration_feasibility,
    determinable_bounds,
    feasible_decision_space,
)


def report(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def reference():
    sc = reference_scenario()
    table = solve_backward(sc, build_state_grid(sc.battery, 101), 101)
    return sc, table


def test_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst, n = 0.0, 30
    for _ in range(n):
        sc = random_small_scenario(rng, max_N=4, max_support=3)
        grid = build_state_grid(sc.battery, int(rng.integers(2, 7)))
        n_dec = int(rng.integers(1, 8))
        diff = np.abs(solve_backward(sc, grid, n_dec).V - brute_force_oracle(sc, grid, n_dec).V)
        worst = max(worst, float(diff.max()))
    elapsed = time.perf_counter() - t0
    report("oracle equivalence", worst <= 1e-9 and elapsed < 30,
           f"{n} instances, max |dV| = {worst:.3g} (<= 1e-9), {elapsed:.2f} s (< 30 s)")


def test_constraint_safety(reference):
    sc, table = reference
    spec = sc.battery
    policies = [Policy1(), Policy2(3), OptimalPolicy(table)]
    n_total, balance, state, power = 10_002, 0, 0, 0
    for i in range(n_total):
        t = rollout(policies[i % 3], sc, seed=1000, index=i // 3)
        balance += int(np.sum(np.abs(t.e + t.u + t.v + t.l) > BALANCE_TOL))
        state += int(np.sum((t.s < 0) | (t.s > spec.capacity)))
        power += int(np.sum((t.v < spec.p_min) | (t.v > spec.p_max)))
    report("constraint safety", balance == state == power == 0,
           f"{n_total} rollouts: {balance} balance residuals > 1e-9 kW, "
           f"{state} state excursions, {power} power excursions")


def test_dominance():
    t0 = time.perf_counter()
    sc = reference_scenario(s0=3.8)
    table = solve_backward(sc, build_state_grid(sc.battery, 101), 101)
    comp = compare_policies([Policy1(), Policy2(3), OptimalPolicy(table)], sc, 1000, seed=7)
    elapsed = time.perf_counter() - t0
    r = comp.reports
    opt = r["optimal"]
    ok = all(opt.mean_j1 + opt.ci95 < r[p].mean_j1 - r[p].ci95 for p in ("policy1", "policy2"))
    detail = ", ".join(f"{p} {x.mean_j1:+.4f}+/-{x.ci95:.4f}" for p, x in r.items())
    report("dominance", ok and elapsed < 60, f"mean J1 {detail}; {elapsed:.1f} s (< 60 s)")


def test_terminal_reserve(reference):
    sc, table = reference
    spec, dt = sc.battery, sc.dt
    e_min, e_max, l_min, l_max = (b[:sc.N] for b in sc.stage_bounds)
    # a decision that charges under every realization exists at every stage
    # whenever the battery has at least one stage of charge headroom left
    s_test = np.linspace(0, spec.capacity - spec.p_max * dt, 50)
    lo, hi = determinable_bounds(s_test[:, None], e_min, e_max, l_min, l_max, dt, spec)
    charge_ok = bool(np.all(hi > -(e_min + l_min)))
    r = monte_carlo(OptimalPolicy(table), sc, 1000, seed=11)
    target = 0.95 * spec.capacity
    report("terminal reserve", charge_ok and r.mean_terminal_soc >= target,
           f"m = {sc.terminal_multiplier:g}, mean terminal SOC {r.mean_terminal_soc:.3f} kWh "
           f">= {target:.2f} kWh; charging feasible every stage: {charge_ok}")


def test_sell_at_peak():
    sc = sell_peak_scenario(peak_start=12, peak_len=4)
    table = solve_backward(sc, build_state_grid(sc.battery, 101), 101)
    u_full = table.U_star[:, -1]
    hours = sc.hours[:sc.N]
    peak = [k for k in range(sc.N) if 12 <= hours[k] <= 15]
    outside = [k for k in range(sc.N) if not 11 <= hours[k] <= 16]
    ok = all(u_full[k] < 0 for k in peak) and all(u_full[k] >= 0 for k in outside)
    report("sell at peak", ok,
           f"U* at full state, peak hours 12-15: {np.round(u_full[peak], 3).tolist()} (< 0); "
           f"min outside 11-16: {u_full[outside].min():.3g} (>= 0)")


def test_sufficiency_soundness():
    rng = np.random.default_rng(77)
    passed = counterexamples = 0
    sweep = None
    for _ in range(1000):
        cap = float(rng.uniform(1, 20))
        spec = BatterySpec(cap, -float(rng.uniform(0.5, 10)), float(rng.uniform(0.5, 10)),
                           float(rng.uniform(0.8, 1)), float(rng.uniform(0.8, 1)),
                           float(rng.uniform(1, 1.25)))
        dt = float(rng.choice([0.25, 0.5, 1.0, 2.0]))
        n = int(rng.integers(1, 25))
        scale = float(rng.uniform(0.2, 1.5)) * min(spec.p_max, -spec.p_min, cap / dt)
        e = np.sort(rng.uniform(0, scale, (n, 2)), axis=1)
        l = -np.sort(rng.uniform(0, scale, (n, 2)), axis=1)[:, ::-1]
        rep = check_configuration_feasibility(e[:, 0], e[:, 1], l[:, 0], l[:, 1], dt, spec)
        if not rep.guaranteed:
            continue
        passed += 1
        sweep = np.linspace(0, cap, 1000)
        lo, hi = determinable_bounds(sweep[None, :], e[:, :1], e[:, 1:], l[:, :1], l[:, 1:], dt, spec)
        counterexamples += int(np.sum(lo > hi))
    zero_measure = 0
    for _ in range(100_000):
        cap = float(rng.uniform(0.1, 50))
        spec = BatterySpec(cap, -float(rng.uniform(0.01, 20)), float(rng.uniform(0.01, 20)),
                           float(rng.uniform(0.5, 1)), float(rng.uniform(0.5, 1)),
                           float(rng.uniform(1, 1.5)))
        f = feasible_decision_space(float(rng.uniform(0, cap)), float(rng.uniform(0, 30)),
                                    -float(rng.uniform(0, 30)), float(rng.uniform(0.1, 4)), spec)
        zero_measure += f.measure <= 0
    report("sufficiency soundness", passed > 0 and counterexamples == 0 and zero_measure == 0,
           f"{passed}/1000 configurations pass a tier, {counterexamples} empty points on "
           f"1000-point sweeps; {zero_measure}/100000 zero-measure feasible spaces")


def test_grid_refinement(reference):
    sc, _ = reference
    v51 = solve_backward(sc, build_state_grid(sc.battery, 51), 101).value(0, sc.s0)
    v201 = solve_backward(sc, build_state_grid(sc.battery, 201), 101).value(0, sc.s0)
    rel = abs(v201 - v51) / abs(v201)
    report("grid refinement", rel < 0.02,
           f"V0(s0) N_s=51 {v51:.6f}, N_s=201 {v201:.6f}, relative difference {rel:.3%} (< 2%)")


def test_model_pipeline():
    # hourly records over 4 days; each hour sees errors -100 and +100 equally often
    records = []
    for i in range(96):
        err = -100.0 if (i // 24) % 2 == 0 else 100.0
        records.append(WeatherRecord(i * 3600.0, 800.0 + err, 800.0, 1.0))
    model = build_pv_model(records, PvPlant(2.5, 1.0), 5, [800.0] * 24)
    expected = {1.75: 0.5, 2.25: 0.5}
    exact = all(dict(zip(d.support, d.probs)) == expected for d in model.by_hour)
    a = np.linspace(0.1, 5.0, 37)
    rms = rms_accuracy(a, a)
    report("model pipeline", exact and rms == (0.0, 100.0),
           f"all 24 hours {expected}: {exact}; rms_accuracy(a, a) = {rms}")


def _outputs(d):
    return {p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


def test_determinism(tmp_path):
    inputs = write_reference_inputs(tmp_path / "in", days=30, seed=0)
    cfg = inputs["config"]
    runs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        codes = [
            main(["ingest", "--weather", str(inputs["weather"]), "--load", str(inputs["load"]),
                  "--config", str(cfg), "--out", str(out / "ingest")]),
            main(["check", "--config", str(cfg), "--out", str(out / "check")]),
            main(["solve", "--config", str(cfg), "--out", str(out / "run"),
                  "--n-states", "51", "--n-decisions", "51"]),
            main(["simulate", "--config", str(cfg), "--out", str(out / "sim"), "--policy", "policy2",
                  "--n", "50", "--seed", "3"]),
            main(["compare", "--config", str(cfg), "--out", str(out / "run"), "--n", "200",
                  "--seed", "7", "--threads", "2"]),
        ]
        assert codes == [0, 0, 0, 0, 0]
        runs.append(_outputs(out))
    a, b = runs
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    report("determinism", same,
           f"{len(a)} output files across ingest/check/solve/simulate/compare byte-identical: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
