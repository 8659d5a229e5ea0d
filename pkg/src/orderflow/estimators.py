"""Hurst exponent estimators and the preprocessing of binned flows.

All estimators consume a path (levels) or its increments and use only
increments, so the starting level never matters. Multiplying the input by a
positive constant leaves every estimate unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .paths import PathGrid

__all__ = [
    "EstimateReport",
    "qv",
    "hurst_fbm",
    "hurst_mixed",
    "hurst_volume",
    "deseasonalize",
    "truncate_outliers",
    "fgn_correlation",
]

ESTIMATORS = ("fbm_qv", "mixed_qv", "volume_acf")
H_GRID = np.round(np.arange(0.01, 0.49 + 1e-9, 0.005), 10)


@dataclass
class EstimateReport:
    estimator: str
    H_hat: float | None
    auxiliary: dict = field(default_factory=dict)
    degenerate: bool = False
    reason: str | None = None

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.degenerate:
            self.H_hat = None

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            return v
        return {"method": self.estimator, "H_hat": clean(self.H_hat),
                "degenerate": self.degenerate, "reason": self.reason,
                "auxiliary": clean(self.auxiliary)}


def _values(series) -> np.ndarray:
    if isinstance(series, PathGrid):
        names = series.names()
        if len(names) != 1:
            raise ValueError("PathGrid input must hold exactly one series")
        series = series[names[0]]
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("estimators take a single path; loop over paths for batches")
    return x


def qv(series, lag: int) -> float:
    """Mean squared increment (1 / (n - lag)) sum (x_{i+lag} - x_i)^2."""
    x = _values(series)
    lag = int(lag)
    if lag < 1:
        raise ValueError("lag must be at least 1")
    if x.size <= lag:
        raise ValueError(f"series of length {x.size} is too short for lag {lag}")
    d = x[lag:] - x[:-lag]
    return float(np.mean(d * d))


def hurst_fbm(series, lags) -> EstimateReport:
    """Half the least-squares slope of log qv(lag) against log lag."""
    lags = [int(l) for l in lags]
    if len(lags) < 2 or len(set(lags)) < 2:
        raise ValueError("need at least two distinct lags")
    q = np.array([qv(series, l) for l in lags])
    aux = {"lags": lags, "qv": q}
    if np.any(q <= 0):
        return EstimateReport("fbm_qv", None, aux, True, "zero quadratic variation")
    slope = np.polyfit(np.log(lags), np.log(q), 1)[0]
    return EstimateReport("fbm_qv", float(slope / 2.0), aux)


def hurst_mixed(series, delta: int) -> EstimateReport:
    """Three-scale quadratic-variation estimate for sigma_W W + sigma_H B^H.

    With q_k = qv(k delta) = sigma_W^2 k delta + sigma_H^2 (k delta)^2H the
    ratio (q4 - 2 q2) / (q2 - 2 q1) equals 2^2H. Time is measured in sample
    steps; the sigmas refer to that unit.
    """
    x = _values(series)
    delta = int(delta)
    if delta < 1:
        raise ValueError("delta must be at least 1")
    if x.size < 16 * delta:
        raise ValueError(f"series needs at least {16 * delta} points for delta={delta}")
    q1, q2, q4 = (qv(x, k * delta) for k in (1, 2, 4))
    aux = {"delta": delta, "q1": q1, "q2": q2, "q4": q4}
    return _mixed_from_moments(q1, q2, q4, delta, aux)


def _mixed_from_moments(q1, q2, q4, delta, aux=None):
    aux = {} if aux is None else aux
    den = q2 - 2.0 * q1
    if not den > 0:
        return EstimateReport("mixed_qv", None, aux, True, "q2 - 2 q1 <= 0")
    ratio = (q4 - 2.0 * q2) / den
    aux["ratio"] = ratio
    if not ratio > 1:
        return EstimateReport("mixed_qv", None, aux, True, "ratio <= 1")
    H = 0.5 * math.log2(ratio)
    # q2 - 2 q1 = sigma_H^2 delta^2H (2^2H - 2)
    c = delta ** (2.0 * H) * (2.0 ** (2.0 * H) - 2.0)
    sigma_H2 = den / c if c != 0 else math.nan
    sigma_W2 = (q1 - sigma_H2 * delta ** (2.0 * H)) / delta
    aux["sigma_H2"] = sigma_H2
    aux["sigma_W2"] = sigma_W2
    return EstimateReport("mixed_qv", H, aux)


def fgn_correlation(H, lags) -> np.ndarray:
    """Autocorrelation 0.5 (|k+1|^2H + |k-1|^2H - 2|k|^2H) of fractional Gaussian noise."""
    k = np.abs(np.asarray(lags, dtype=float))
    h2 = 2.0 * np.asarray(H, dtype=float)[..., None] if np.ndim(H) else 2.0 * H
    return 0.5 * ((k + 1) ** h2 + np.abs(k - 1) ** h2 - 2.0 * k ** h2)


def hurst_volume(increments, max_lag: int) -> EstimateReport:
    """Fit sigma^2 rho_H(k), k = 0..max_lag, to empirical autocovariances of increments.

    Ordinary least squares over H in [0.01, 0.49] (step 0.005) with the
    optimal sigma^2 in closed form for each H. An optimum on the upper edge
    is flagged in ``auxiliary['boundary']``.
    """
    x = _values(increments)
    max_lag = int(max_lag)
    if max_lag < 4:
        raise ValueError("max_lag must be at least 4")
    if x.size <= 2 * max_lag:
        raise ValueError("series too short for the requested max_lag")
    x = x - x.mean()
    n = x.size
    acov = np.array([np.dot(x[: n - k], x[k:]) / n for k in range(max_lag + 1)])
    aux = {"max_lag": max_lag, "acov": acov}
    if acov[0] <= 0:
        return EstimateReport("volume_acf", None, aux, True, "zero lag-0 autocovariance")
    lags = np.arange(max_lag + 1)
    rho = fgn_correlation(H_GRID, lags)  # (len(H_GRID), max_lag + 1)
    s2 = np.clip(rho @ acov / np.sum(rho * rho, axis=1), 0.0, None)
    sse = np.sum((acov[None, :] - s2[:, None] * rho) ** 2, axis=1)
    i = int(np.argmin(sse))
    aux.update({"sigma": float(np.sqrt(s2[i])), "sse": float(sse[i]),
                "boundary": bool(i == H_GRID.size - 1 or i == 0)})
    return EstimateReport("volume_acf", float(H_GRID[i]), aux)


def deseasonalize(bins, return_flags: bool = False):
    """Divide each intraday column by its mean across days.

    ``bins`` is a (days, bins) array of nonnegative volumes. Columns whose
    mean is zero are left as they are; their indices are returned when
    ``return_flags`` is set.
    """
    m = np.asarray(bins, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a (days, intraday bins) matrix")
    if m.shape[0] < 5:
        raise ValueError("need at least 5 days")
    if np.any(m < 0):
        raise ValueError("volumes must be nonnegative")
    profile = m.mean(axis=0)
    zero = profile == 0
    out = m / np.where(zero, 1.0, profile)
    if return_flags:
        return out, np.flatnonzero(zero)
    return out


def truncate_outliers(increments, c: float = 3.0):
    """Clip to +-c sample standard deviations; returns (clipped, number clipped)."""
    x = np.asarray(increments, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if sd == 0:
        return x.copy(), 0
    lim = c * sd
    clipped = np.clip(x, -lim, lim)
    return clipped, int(np.count_nonzero(clipped != x))
