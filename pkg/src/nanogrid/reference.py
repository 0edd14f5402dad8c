"""Synthetic residential reference data and scenarios.

The weather and load generators stand in for the archived forecast/sensor
pairs and building load records; everything is seeded and deterministic.
Battery: 6.4 kWh, +/-5 kW, lossless. PV plant: 2.5 kW.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import HOURS_PER_DAY, SECONDS_PER_HOUR, build_time_grid
from .economics import PricingSchedule
from .scenario import Scenario
from .stochastic import (
    CyclostationaryModel,
    EmpiricalDistribution,
    PvPlant,
    WeatherRecord,
    build_pv_model,
    fit_load_model,
    save_model,
)
from .storage import BatterySpec

REFERENCE_PLANT = PvPlant(capacity_kw=2.5, derate=1.0)
REFERENCE_S0 = 3.8
REFERENCE_M = 100.0

# hourly residential consumption profile, kW
LOAD_PROFILE = np.array([
    0.45, 0.40, 0.38, 0.37, 0.38, 0.45, 0.75, 1.10, 1.15, 0.85, 0.65, 0.60,
    0.60, 0.62, 0.65, 0.75, 0.95, 1.30, 1.65, 1.75, 1.55, 1.20, 0.85, 0.60,
])

# time-of-use tariff: off-peak / part-peak / peak purchase prices, $/kWh
BUY = ([0.10] * 7 + [0.17] * 6 + [0.29] * 6 + [0.17] * 2 + [0.10] * 3)
# sell price highest over 12:00-16:00
SELL = ([0.04] * 7 + [0.08] * 5 + [0.32] * 4 + [0.12] * 4 + [0.06] * 4)


def clear_sky_forecast(hour: float) -> float:
    """Bell-shaped forecast irradiance (W/m^2), zero outside 06:00-18:00."""
    if not 6.0 < hour < 18.0:
        return 0.0
    return 900.0 * math.sin(math.pi * (hour - 6.0) / 12.0)


def synthetic_weather_records(days: int = 60, seed: int = 0, t0: float = 0.0) -> list:
    """Hourly measurements paired with hour-ahead forecasts.

    About 15% of daylight forecasts are missing; downstream the error is held from
    the previous hour. Measured irradiance is the forecast times a
    cloudiness factor, capped at 1000 W/m^2.
    """
    rng = np.random.default_rng(seed)
    records = []
    for i in range(days * HOURS_PER_DAY):
        ts = t0 + i * SECONDS_PER_HOUR
        hour = i % HOURS_PER_DAY
        fc = clear_sky_forecast(hour)
        factor = float(np.clip(rng.normal(0.9, 0.2), 0.2, 1.1))
        measured = min(1000.0, round(fc * factor, 1))
        # night forecasts are trivially zero and never missing
        dropped = rng.random() < 0.15 and fc > 0
        forecast = None if dropped else fc
        records.append(WeatherRecord(ts, measured, forecast, 1.0))
    return records


def synthetic_load_records(days: int = 60, seed: int = 1, t0: float = 0.0) -> list:
    """Hourly consumption (kW, positive) around the residential profile."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(days * HOURS_PER_DAY):
        base = LOAD_PROFILE[i % HOURS_PER_DAY]
        kw = float(np.clip(base * rng.lognormal(0.0, 0.2), 0.2, 2.4))
        out.append((t0 + i * SECONDS_PER_HOUR, round(kw, 3)))
    return out


def reference_pricing() -> PricingSchedule:
    return PricingSchedule(tuple(BUY), tuple(SELL))


def reference_battery() -> BatterySpec:
    return BatterySpec(capacity=6.4, p_min=-5.0, p_max=5.0)


def reference_models(seed: int = 0, days: int = 60, n_states: int = 5) -> tuple:
    """(pv, load) cyclostationary models fitted from the synthetic data.

    The PV reference forecast per hour is the clear-sky curve itself, i.e.
    the forecast expected on a typical day.
    """
    weather = synthetic_weather_records(days, seed)
    loads = synthetic_load_records(days, seed + 1)
    ref = [clear_sky_forecast(h) for h in range(HOURS_PER_DAY)]
    pv = build_pv_model(weather, REFERENCE_PLANT, n_states, ref)
    load = fit_load_model(loads, n_states)
    return pv, load


def reference_scenario(days: int = 1, s0: float = REFERENCE_S0, m: float = REFERENCE_M,
                       seed: int = 0) -> Scenario:
    """Residential scenario, midnight start, hourly stages."""
    pv, load = reference_models(seed)
    grid = build_time_grid(0, days * 86400, 3600)
    return Scenario(grid, reference_battery(), reference_pricing(), pv, load, m, s0)


def sell_peak_scenario(peak_start: int = 12, peak_len: int = 4) -> Scenario:
    """No PV, constant 1 kW load, flat purchase price, one sell-price peak."""
    sell = [0.05] * HOURS_PER_DAY
    for h in range(peak_start, peak_start + peak_len):
        sell[h] = 0.5
    pricing = PricingSchedule((0.2,) * HOURS_PER_DAY, tuple(sell))
    pv = CyclostationaryModel.constant(EmpiricalDistribution.singleton(0.0))
    load = CyclostationaryModel.constant(EmpiricalDistribution.singleton(-1.0))
    grid = build_time_grid(0, 86400, 3600)
    return Scenario(grid, reference_battery(), pricing, pv, load, REFERENCE_M, REFERENCE_S0)


def reference_config(models: dict) -> dict:
    return {
        "horizon": {"start_epoch_s": 0, "end_epoch_s": 86400, "dt_s": 3600, "utc_offset_h": 0},
        "battery": {"capacity_kwh": 6.4, "p_min_kw": -5.0, "p_max_kw": 5.0,
                    "eta_s": 1.0, "xi_charge": 1.0, "xi_discharge": 1.0},
        "pricing": {"buy_per_hour": list(BUY), "sell_per_hour": list(SELL)},
        "terminal_multiplier": REFERENCE_M,
        "initial_soc_kwh": REFERENCE_S0,
        "models": models,
        "pv_plant": {"capacity_kw": REFERENCE_PLANT.capacity_kw, "derate": REFERENCE_PLANT.derate},
        "n_pv_states": 5,
        "n_load_states": 5,
    }


def write_weather_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_epoch_s", "measured_wm2", "forecast_wm2", "horizon_h"])
        for r in records:
            w.writerow([repr(r.timestamp), "" if r.measured is None else repr(r.measured),
                        "" if r.forecast is None else repr(r.forecast), repr(r.horizon_h)])


def write_load_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_epoch_s", "load_kw"])
        for ts, kw in rows:
            w.writerow([repr(ts), repr(kw)])


def write_reference_inputs(out_dir, days: int = 60, seed: int = 0) -> dict:
    """Write weather/load CSVs, fitted model files and a scenario config.

    Returns the written paths keyed by role.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_weather_csv(synthetic_weather_records(days, seed), out / "weather.csv")
    write_load_csv(synthetic_load_records(days, seed + 1), out / "load.csv")
    pv, load = reference_models(seed, days)
    save_model(pv, out / "pv_model.json", "pv")
    save_model(load, out / "load_model.json", "load")
    cfg = reference_config({"pv": "pv_model.json", "load": "load_model.json"})
    (out / "scenario.json").write_text(json.dumps(cfg, indent=1) + "\n")
    return {"weather": out / "weather.csv", "load": out / "load.csv",
            "pv_model": out / "pv_model.json", "load_model": out / "load_model.json",
            "config": out / "scenario.json"}
