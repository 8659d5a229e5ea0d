"""End-to-end trade-file pipeline on synthetic data.

Simulated event streams are exported as unit-volume trades, binned per
minute over a regular session, deseasonalised, and passed to the rough
volume estimator day by day.
"""
import datetime as dt

import numpy as np

from orderflow import bin_flows, simulate_two_layer
from orderflow.cli import build_two_layer
from orderflow.config import parse_config
from orderflow.estimators import deseasonalize, hurst_volume, truncate_outliers
from orderflow.ingest import stream_to_trades
from orderflow.rng import path_seeds

_, _, params = build_two_layer(parse_config("", T=4096.0))
records = []
for i, s in enumerate(path_seeds(11, 10)):
    day = dt.date(2024, 1, 1) + dt.timedelta(days=i)
    records += stream_to_trades(simulate_two_layer(params, 4096.0, s), date=day)

bins = bin_flows(records, 60)
print(f"{len(records)} trades over {len(bins.dates)} days, {bins.signed.shape[1]} bins per day")
vols = deseasonalize(bins.unsigned)
hs = []
for v in vols:
    inc, _ = truncate_outliers(np.diff(v))
    hs.append(hurst_volume(inc, 10).H_hat)
print("per-day volume Hurst:", np.round(hs, 3), "mean", round(float(np.mean(hs)), 3))
