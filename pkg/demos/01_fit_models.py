"""
Fitting PV and load models from data
====================================

Forecast errors are collected per hour of day, added to a representative
forecast, mapped to PV power and reduced to a few discrete states. Load
records are negated and discretized the same way.
"""

import numpy as np

from nanogrid.reference import (
    REFERENCE_PLANT,
    clear_sky_forecast,
    synthetic_load_records,
    synthetic_weather_records,
)
from nanogrid.stochastic import (
    FitReport,
    build_pv_model,
    compute_forecast_errors,
    fit_load_model,
    rms_accuracy,
)

# Sixty days of hourly measurements with hour-ahead forecasts.
weather = synthetic_weather_records(days=60, seed=0)
errors, skipped = compute_forecast_errors(weather)
print(f"{len(errors)} forecast errors, {skipped} records without a forecast")

# How good is the raw forecast on daylight hours?
day = [r for r in weather if r.forecast and r.measured is not None]
rms, acc = rms_accuracy([r.measured for r in day], [r.forecast for r in day])
print(f"forecast RMS error {rms:.1f} W/m2, accuracy {acc:.1f}%")

# Fit the PV process against the clear-sky curve.
report = FitReport()
reference = [clear_sky_forecast(h) for h in range(24)]
pv = build_pv_model(weather, REFERENCE_PLANT, 5, reference, report=report)
print(f"{report.n_backfilled} hours backfilled, buckets of {set(report.bucket_sizes)} errors")

load = fit_load_model(synthetic_load_records(days=60, seed=1), 5)

print("\nhour  E[pv] kW  pv states            E[load] kW")
for h in range(0, 24, 3):
    d = pv.at_hour(h)
    print(f"{h:4d}  {d.mean:8.3f}  {np.round(d.support, 2)!s:20}  {load.at_hour(h).mean:8.3f}")
