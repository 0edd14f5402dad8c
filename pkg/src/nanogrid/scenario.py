"""Scenario bundle (time grid, battery, prices, PV and load models) and config I/O.

Config keys (JSON or YAML)::

    horizon:      {start_epoch_s, end_epoch_s, dt_s, utc_offset_h?}
    battery:      {capacity_kwh, p_min_kw, p_max_kw, eta_s, xi_charge, xi_discharge}
    pricing:      {buy_per_hour: [24], sell_per_hour: [24]}
    terminal_multiplier: float
    initial_soc_kwh: float
    models:       {pv: path, load: path}        # paths relative to the config file
    pv_plant:     {capacity_kw, derate}         # used by ``ingest`` only
    n_pv_states, n_load_states                  # used by ``ingest`` only
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from .core import ConfigurationError, TimeGrid, build_time_grid
from .economics import PricingSchedule
from .stochastic import CyclostationaryModel, load_model
from .storage import BatterySpec, check_configuration_feasibility


@dataclass(frozen=True)
class Scenario:
    grid: TimeGrid
    battery: BatterySpec
    pricing: PricingSchedule
    pv: CyclostationaryModel
    load: CyclostationaryModel
    terminal_multiplier: float
    s0: float

    def __post_init__(self):
        if not 0 <= self.s0 <= self.battery.capacity:
            raise ConfigurationError(
                f"initial SOC {self.s0} outside [0, {self.battery.capacity}]")
        if self.terminal_multiplier < 0:
            raise ConfigurationError("terminal multiplier must be >= 0")
        for h, d in enumerate(self.pv.by_hour):
            if d.lo < 0:
                raise ConfigurationError(f"PV model hour {h} has negative support {d.lo}")
        for h, d in enumerate(self.load.by_hour):
            if d.hi > 0:
                raise ConfigurationError(f"load model hour {h} has positive support {d.hi}")

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def dt(self) -> float:
        return self.grid.dt

    @cached_property
    def hours(self) -> np.ndarray:
        return self.grid.hours()

    @cached_property
    def stage_bounds(self) -> tuple:
        """Per-stage (e_min, e_max, l_min, l_max) arrays over stages 0..N."""
        pv = [self.pv.at_hour(h) for h in self.hours]
        lo = [self.load.at_hour(h) for h in self.hours]
        return (np.array([d.lo for d in pv]), np.array([d.hi for d in pv]),
                np.array([d.lo for d in lo]), np.array([d.hi for d in lo]))

    @cached_property
    def expected_net(self) -> np.ndarray:
        """E[e_k] + E[l_k] for stages 0..N."""
        return np.array([self.pv.at_hour(h).mean + self.load.at_hour(h).mean
                         for h in self.hours])

    def feasibility(self):
        e_min, e_max, l_min, l_max = self.stage_bounds
        n = self.N  # decision stages only
        return check_configuration_feasibility(
            e_min[:n], e_max[:n], l_min[:n], l_max[:n], self.dt, self.battery)


def read_config(path) -> dict:
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix in (".yaml", ".yml"):
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def _get(cfg: dict, dotted: str):
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigurationError(f"missing config key {dotted!r}")
        node = node[part]
    return node


def battery_from_config(block: dict) -> BatterySpec:
    return BatterySpec(
        capacity=float(block["capacity_kwh"]),
        p_min=float(block["p_min_kw"]),
        p_max=float(block["p_max_kw"]),
        eta_s=float(block.get("eta_s", 1.0)),
        xi_charge=float(block.get("xi_charge", 1.0)),
        xi_discharge=float(block.get("xi_discharge", 1.0)),
    )


def scenario_from_config(cfg: dict, base_dir=".") -> Scenario:
    """Build a Scenario; model paths resolve against ``base_dir``."""
    base_dir = Path(base_dir)
    try:
        grid = build_time_grid(
            float(_get(cfg, "horizon.start_epoch_s")),
            float(_get(cfg, "horizon.end_epoch_s")),
            float(_get(cfg, "horizon.dt_s")),
            float(cfg["horizon"].get("utc_offset_h", 0.0)),
        )
        battery = battery_from_config(_get(cfg, "battery"))
        pricing = PricingSchedule(tuple(_get(cfg, "pricing.buy_per_hour")),
                                  tuple(_get(cfg, "pricing.sell_per_hour")))
        pv = load_model(base_dir / _get(cfg, "models.pv"))
        load = load_model(base_dir / _get(cfg, "models.load"))
        return Scenario(grid, battery, pricing, pv, load,
                        float(_get(cfg, "terminal_multiplier")),
                        float(_get(cfg, "initial_soc_kwh")))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"bad config value: {exc}") from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    return scenario_from_config(read_config(path), path.parent)


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
