"""Uniform time grids carrying one or more named value series."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["PathGrid", "uniform_grid"]


def uniform_grid(horizon: float, n_steps: int) -> np.ndarray:
    """n_steps + 1 equally spaced points on [0, horizon]."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    return np.linspace(0.0, horizon, n_steps + 1)


@dataclass
class PathGrid:
    """Named series sampled on a common uniform grid ``t``.

    Each series has the grid along its last axis; leading axes index
    independent Monte Carlo paths.
    """

    t: np.ndarray
    series: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or self.t.size < 2:
            raise ValueError("grid must be one-dimensional with at least two points")
        steps = np.diff(self.t)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be uniform and increasing")
        for name, values in list(self.series.items()):
            self.series[name] = self._check(name, values)

    def _check(self, name, values):
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.t.size:
            raise ValueError(
                f"series {name!r} has {values.shape[-1]} points, grid has {self.t.size}")
        return values

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def __getitem__(self, name):
        return self.series[name]

    def __contains__(self, name):
        return name in self.series

    def names(self):
        return list(self.series)

    def with_series(self, **new):
        """Copy with additional (or replaced) series."""
        merged = dict(self.series)
        merged.update(new)
        return PathGrid(self.t.copy(), merged)

    def same_grid(self, other: "PathGrid") -> bool:
        return self.t.size == other.t.size and np.allclose(self.t, other.t, rtol=1e-12, atol=0)

    def rescaled(self, time_factor: float, value_factor: float) -> "PathGrid":
        """Grid t -> t * time_factor and every series multiplied by value_factor."""
        return PathGrid(self.t * time_factor,
                        {k: v * value_factor for k, v in self.series.items()})

    def to_csv(self, path, columns=None, path_index=0):
        """Write ``t`` and the chosen series (one path) as CSV with a header."""
        columns = self.names() if columns is None else list(columns)
        data = [self.t]
        for c in columns:
            v = self.series[c]
            data.append(v if v.ndim == 1 else v.reshape(-1, v.shape[-1])[path_index])
        header = ",".join(["t", *columns])
        np.savetxt(path, np.column_stack(data), delimiter=",", header=header,
                   comments="", fmt="%.12g")

    @classmethod
    def from_csv(cls, path) -> "PathGrid":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if header[0] != "t":
            raise ValueError("first CSV column must be 't'")
        return cls(data[:, 0], {name: data[:, i + 1] for i, name in enumerate(header[1:])})
