"""Cyclostationary PV and load models built from weather and load records.

The PV pipeline is::

    weather records -> forecast errors -> piecewise-constant fill
        -> 24 hourly error buckets -> forecast + error (irradiance)
        -> linear irradiance-to-power map -> discretized kW distribution

Loads are grouped by hour of day, negated (consumption is negative power)
and discretized.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    HOURS_PER_DAY,
    SECONDS_PER_HOUR,
    ConfigurationError,
    EmptyDatasetError,
    TimeGrid,
    hour_of_day,
    hour_of_timestamp,
)

logger = logging.getLogger(__name__)

PROB_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Finite discrete distribution over power (or irradiance) values."""

    support: tuple
    probs: tuple

    def __post_init__(self):
        support = tuple(float(x) for x in self.support)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if len(support) == 0:
            raise ValueError("distribution needs at least one support point")
        if len(support) != len(probs):
            raise ValueError("support and probs differ in length")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError(f"support must be strictly increasing: {support}")
        if any(p < 0 for p in probs):
            raise ValueError("negative probability")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")

    @classmethod
    def from_weighted(cls, values, weights) -> "EmpiricalDistribution":
        """Merge equal values, sort, and normalize the weights."""
        values = np.asarray(values, dtype=float)
        weights = np.asarray(weights, dtype=float)
        uniq, inv = np.unique(values, return_inverse=True)
        mass = np.zeros(len(uniq))
        np.add.at(mass, inv, weights)
        keep = mass > 0
        uniq, mass = uniq[keep], mass[keep]
        return cls(tuple(uniq), tuple(_normalize(mass)))

    @classmethod
    def singleton(cls, value: float) -> "EmpiricalDistribution":
        return cls((float(value),), (1.0,))

    @property
    def mean(self) -> float:
        return math.fsum(x * p for x, p in zip(self.support, self.probs))

    @property
    def lo(self) -> float:
        return self.support[0]

    @property
    def hi(self) -> float:
        return self.support[-1]

    def to_dict(self) -> dict:
        return {"support": list(self.support), "probs": list(self.probs)}

    @classmethod
    def from_dict(cls, d: dict) -> "EmpiricalDistribution":
        return cls(tuple(d["support"]), tuple(d["probs"]))


def _normalize(mass: np.ndarray) -> np.ndarray:
    total = math.fsum(mass)
    if total <= 0:
        raise ValueError("total probability mass must be positive")
    p = np.asarray(mass, dtype=float) / total
    # push the rounding residue into the largest entry
    p[np.argmax(p)] += 1.0 - math.fsum(p)
    return p


@dataclass(frozen=True)
class CyclostationaryModel:
    """24 hour-of-day distributions describing a 24-hour periodic process."""

    by_hour: tuple

    def __post_init__(self):
        object.__setattr__(self, "by_hour", tuple(self.by_hour))
        if len(self.by_hour) != HOURS_PER_DAY:
            raise ValueError(f"need {HOURS_PER_DAY} hourly distributions, got {len(self.by_hour)}")

    def at_hour(self, h: int) -> EmpiricalDistribution:
        return self.by_hour[h % HOURS_PER_DAY]

    def at(self, k: int, grid: Optional[TimeGrid] = None) -> EmpiricalDistribution:
        """Distribution at stage ``k``; without a grid, stage k is hour k mod 24."""
        h = hour_of_day(k, grid) if grid is not None else k % HOURS_PER_DAY
        return self.by_hour[h]

    def to_dict(self, process: str = "") -> dict:
        return {"process": process, "by_hour": [d.to_dict() for d in self.by_hour]}

    @classmethod
    def from_dict(cls, d: dict) -> "CyclostationaryModel":
        return cls(tuple(EmpiricalDistribution.from_dict(x) for x in d["by_hour"]))

    @classmethod
    def constant(cls, dist: EmpiricalDistribution) -> "CyclostationaryModel":
        return cls((dist,) * HOURS_PER_DAY)


def save_model(model: CyclostationaryModel, path, process: str = "") -> None:
    # repr-based float output makes the round trip bit-exact
    Path(path).write_text(json.dumps(model.to_dict(process), indent=1) + "\n")


def load_model(path) -> CyclostationaryModel:
    return CyclostationaryModel.from_dict(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------------
# sampling / moments


def sample(model: CyclostationaryModel, k: int, rng: np.random.Generator,
           grid: Optional[TimeGrid] = None) -> float:
    dist = model.at(k, grid)
    if len(dist.support) == 1:
        return dist.support[0]
    cdf = np.cumsum(dist.probs)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return dist.support[min(i, len(dist.support) - 1)]


def sample_path(model: CyclostationaryModel, hours: Sequence[int],
                rng: np.random.Generator) -> np.ndarray:
    """One realization per entry of ``hours`` by inverse-CDF sampling."""
    hours = np.asarray(hours, dtype=int)
    uniforms = rng.random(len(hours))
    out = np.empty(len(hours))
    for h in np.unique(hours):
        dist = model.by_hour[h]
        mask = hours == h
        cdf = np.cumsum(dist.probs)
        idx = np.searchsorted(cdf, uniforms[mask] * cdf[-1], side="right")
        out[mask] = np.asarray(dist.support)[np.minimum(idx, len(dist.support) - 1)]
    return out


def expectation(model: CyclostationaryModel, k: int, grid: Optional[TimeGrid] = None) -> float:
    return model.at(k, grid).mean


def bounds(model: CyclostationaryModel, k: int, grid: Optional[TimeGrid] = None) -> tuple:
    dist = model.at(k, grid)
    return dist.lo, dist.hi


# --------------------------------------------------------------------------
# weather records and forecast errors


@dataclass(frozen=True)
class WeatherRecord:
    timestamp: float
    measured: Optional[float] = None  # W/m^2
    forecast: Optional[float] = None  # W/m^2
    horizon_h: float = 0.0

    def __post_init__(self):
        if self.measured is None and self.forecast is None:
            raise ValueError(f"record at {self.timestamp} has neither measurement nor forecast")
        if self.horizon_h < 0:
            raise ValueError(f"negative forecast horizon {self.horizon_h}")


@dataclass(frozen=True)
class PvPlant:
    capacity_kw: float  # rated output at 1000 W/m^2
    derate: float = 1.0

    def __post_init__(self):
        if not self.capacity_kw > 0:
            raise ValueError(f"PV capacity must be positive, got {self.capacity_kw}")
        if not 0 < self.derate <= 1:
            raise ValueError(f"derate must lie in (0, 1], got {self.derate}")


def compute_forecast_errors(records: Iterable[WeatherRecord]) -> tuple:
    """Measured minus forecast irradiance for every complete record.

    Returns ``(errors, n_skipped)`` where ``errors`` is a list of
    ``(timestamp, error)`` pairs.
    """
    errors = []
    skipped = 0
    for rec in records:
        if rec.measured is None or rec.forecast is None:
            skipped += 1
            continue
        errors.append((rec.timestamp, rec.measured - rec.forecast))
    if not errors:
        raise EmptyDatasetError("no record carries both a measurement and a forecast")
    return errors, skipped


def fill_piecewise_constant(sparse: Sequence[tuple], grid: Sequence[float]) -> tuple:
    """Hold the latest error at or before each grid timestamp.

    Grid points before the first observation take the first observed value.
    Returns ``(dense, n_backfilled)`` with ``dense`` a list of
    ``(timestamp, error)``.
    """
    if len(sparse) == 0:
        raise EmptyDatasetError("no forecast errors to fill from")
    ts = np.array([t for t, _ in sparse], dtype=float)
    vals = [v for _, v in sparse]
    if np.any(np.diff(ts) < 0):
        raise ValueError("sparse errors must be sorted by timestamp")
    grid = np.asarray(grid, dtype=float)
    idx = np.searchsorted(ts, grid, side="right") - 1
    n_backfilled = int(np.count_nonzero(idx < 0))
    idx = np.maximum(idx, 0)
    return [(float(t), vals[i]) for t, i in zip(grid, idx)], n_backfilled


def group_errors_by_hour(dense: Iterable[tuple], utc_offset_h: float = 0.0) -> list:
    """Partition ``(timestamp, error)`` pairs into 24 hour-of-day buckets."""
    buckets = [[] for _ in range(HOURS_PER_DAY)]
    for t, err in dense:
        buckets[hour_of_timestamp(t, utc_offset_h)].append(err)
    return buckets


def predict_measurement_distribution(forecast: float, error_dataset: Sequence[float]) -> tuple:
    """Distribution of forecast + historical error, clamped at zero irradiance.

    Returns ``(dist, fallback)``; ``fallback`` is True when the error dataset
    was empty and the forecast was taken as exact.
    """
    if len(error_dataset) == 0:
        logger.warning("empty error bucket; treating forecast %.1f W/m2 as exact", forecast)
        return EmpiricalDistribution.singleton(max(forecast, 0.0)), True
    values = np.maximum(forecast + np.asarray(error_dataset, dtype=float), 0.0)
    return EmpiricalDistribution.from_weighted(values, np.ones(len(values))), False


def irradiance_to_pv_power(dist: EmpiricalDistribution, plant: PvPlant) -> EmpiricalDistribution:
    """Linear map g -> capacity * derate * g / 1000 applied to the support."""
    power = [plant.capacity_kw * plant.derate * g / 1000.0 for g in dist.support]
    return EmpiricalDistribution.from_weighted(power, dist.probs)


def discretize(samples, n_states: int, weights=None) -> EmpiricalDistribution:
    """Reduce samples to at most ``n_states`` states by quantile binning.

    With at most ``n_states`` distinct values the exact empirical distribution
    is returned. Otherwise each distinct value goes to the quantile bin that
    holds its first (lowest-rank) occurrence, so equal values are never split;
    states are the weighted bin means and probabilities the bin masses.
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptyDatasetError("cannot discretize an empty sample")
    w = np.ones(samples.size) if weights is None else np.asarray(weights, dtype=float)
    uniq, inv = np.unique(samples, return_inverse=True)
    mass = np.zeros(len(uniq))
    np.add.at(mass, inv, w)
    if len(uniq) <= n_states:
        return EmpiricalDistribution.from_weighted(uniq, mass)

    total = math.fsum(mass)
    start = np.concatenate(([0.0], np.cumsum(mass)[:-1])) / total
    bins = np.minimum((start * n_states + 1e-12).astype(int), n_states - 1)
    support, probs = [], []
    for b in np.unique(bins):
        sel = bins == b
        m = math.fsum(mass[sel])
        support.append(math.fsum(uniq[sel] * mass[sel]) / m)
        probs.append(m)
    return EmpiricalDistribution(tuple(support), tuple(_normalize(np.array(probs))))


# --------------------------------------------------------------------------
# model fitting


@dataclass
class FitReport:
    n_records: int = 0
    n_skipped: int = 0
    n_backfilled: int = 0
    bucket_sizes: list = field(default_factory=list)
    fallback_hours: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def fit_load_model(hourly_load: Iterable[tuple], n_states: int,
                   utc_offset_h: float = 0.0) -> CyclostationaryModel:
    """Fit the load process from ``(timestamp, consumption_kw)`` pairs.

    Consumption is given as positive kW and negated here.
    """
    buckets = [[] for _ in range(HOURS_PER_DAY)]
    for t, kw in hourly_load:
        buckets[hour_of_timestamp(t, utc_offset_h)].append(-float(kw))
    for h, b in enumerate(buckets):
        if not b:
            raise EmptyDatasetError(f"no load data for hour {h}")
    return CyclostationaryModel(tuple(discretize(b, n_states) for b in buckets))


def reference_forecast_by_hour(records: Iterable[WeatherRecord],
                               utc_offset_h: float = 0.0) -> list:
    """Mean forecast per hour of day (0 where no forecast exists)."""
    sums = [[] for _ in range(HOURS_PER_DAY)]
    for rec in records:
        if rec.forecast is not None:
            sums[hour_of_timestamp(rec.timestamp, utc_offset_h)].append(rec.forecast)
    return [math.fsum(s) / len(s) if s else 0.0 for s in sums]


def build_pv_model(records: Sequence[WeatherRecord], plant: PvPlant, n_states: int,
                   reference_forecast: Sequence[float], utc_offset_h: float = 0.0,
                   report: Optional[FitReport] = None) -> CyclostationaryModel:
    """Fit the PV process: error buckets -> irradiance -> kW -> discrete states."""
    if len(reference_forecast) != HOURS_PER_DAY:
        raise ValueError("reference forecast needs one value per hour of day")
    records = sorted(records, key=lambda r: r.timestamp)
    errors, skipped = compute_forecast_errors(records)
    first = math.floor(records[0].timestamp / SECONDS_PER_HOUR) * SECONDS_PER_HOUR
    last = records[-1].timestamp
    hourly = np.arange(first, last + 1e-9, SECONDS_PER_HOUR)
    dense, backfilled = fill_piecewise_constant(errors, hourly)
    buckets = group_errors_by_hour(dense, utc_offset_h)

    by_hour = []
    fallbacks = []
    for h in range(HOURS_PER_DAY):
        irr, fb = predict_measurement_distribution(reference_forecast[h], buckets[h])
        if fb:
            fallbacks.append(h)
        pv = irradiance_to_pv_power(irr, plant)
        by_hour.append(discretize(pv.support, n_states, weights=pv.probs))

    if report is not None:
        report.n_records = len(records)
        report.n_skipped = skipped
        report.n_backfilled = backfilled
        report.bucket_sizes = [len(b) for b in buckets]
        report.fallback_hours = fallbacks
    return CyclostationaryModel(tuple(by_hour))


def rms_accuracy(series_a, series_b) -> tuple:
    """RMS error of ``b`` against reference ``a`` and the percent accuracy."""
    a = np.asarray(series_a, dtype=float)
    b = np.asarray(series_b, dtype=float)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("series must be non-empty and of equal length")
    rms_a = math.sqrt(np.mean(a * a))
    if rms_a == 0:
        raise ValueError("accuracy undefined: reference series is identically zero")
    rms_err = math.sqrt(np.mean((a - b) ** 2))
    return rms_err, 100.0 * (1.0 - rms_err / rms_a)


# --------------------------------------------------------------------------
# CSV ingestion


def _parse_float(text: str, line: int, name: str) -> Optional[float]:
    text = text.strip()
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"line {line}: cannot parse {name}={text!r}") from None


def read_weather_csv(path) -> list:
    """Read ``timestamp_epoch_s,measured_wm2,forecast_wm2,horizon_h`` rows."""
    expected = ["timestamp_epoch_s", "measured_wm2", "forecast_wm2", "horizon_h"]
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected:
            raise ConfigurationError(f"line 1: expected header {','.join(expected)}")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ConfigurationError(f"line {line}: expected 4 fields, got {len(row)}")
            ts = _parse_float(row[0], line, "timestamp_epoch_s")
            if ts is None:
                raise ConfigurationError(f"line {line}: missing timestamp")
            measured = _parse_float(row[1], line, "measured_wm2")
            forecast = _parse_float(row[2], line, "forecast_wm2")
            horizon = _parse_float(row[3], line, "horizon_h")
            try:
                records.append(WeatherRecord(ts, measured, forecast,
                                             0.0 if horizon is None else horizon))
            except ValueError as exc:
                raise ConfigurationError(f"line {line}: {exc}") from None
    if not records:
        raise EmptyDatasetError(f"{path}: no weather records")
    return records


def read_load_csv(path) -> list:
    """Read ``timestamp_epoch_s,load_kw`` rows (consumption, kW >= 0)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["timestamp_epoch_s", "load_kw"]:
            raise ConfigurationError("line 1: expected header timestamp_epoch_s,load_kw")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ConfigurationError(f"line {line}: expected 2 fields, got {len(row)}")
            ts = _parse_float(row[0], line, "timestamp_epoch_s")
            kw = _parse_float(row[1], line, "load_kw")
            if ts is None or kw is None:
                raise ConfigurationError(f"line {line}: missing value")
            if kw < 0:
                raise ConfigurationError(f"line {line}: load_kw must be >= 0, got {kw}")
            out.append((ts, kw))
    if not out:
        raise EmptyDatasetError(f"{path}: no load records")
    return out
