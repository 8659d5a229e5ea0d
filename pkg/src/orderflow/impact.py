"""Propagator prices, impact curves and a Monte Carlo metaorder experiment.

The price is kappa times the conditional expectation of the total future
signed flow. For a signed flow whose self-excitation acts through the kernel
a k2, an event at lag u contributes

    xi(u) = 1 + a r int_u^inf k2,     r = 1 / (1 - a ||k2||_1),

since the pending intensity a int_u^inf k2 of each past event is amplified
by the total expected signed progeny r of every future event. With marks
visible (core vs reaction), core events also carry the pending core
intensity a0 int_u^inf phi0, each unit of which brings c = r / (1 - a0)
signed events:

    xi_core(u) = 1 + a0 c int_u^inf phi0 + a1 r int_u^inf k2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .hawkes import CB, CS, EventStream, TwoLayerParams, simulate_cluster
from .kernels import GridKernel, KernelMatrixSpec, resolvent
from .paths import PathGrid
from .rng import child_seed, generator, map_paths

__all__ = [
    "PropagatorSpec",
    "InsufficientPathsError",
    "propagator_kernel",
    "two_layer_propagator",
    "price_path",
    "mi_curve",
    "vol_hurst",
    "impact_exponent",
    "volume_hurst",
    "metaorder_experiment",
]


class InsufficientPathsError(RuntimeError):
    """Monte Carlo error of the impact curve is too large for the requested paths."""


@dataclass(frozen=True)
class PropagatorSpec:
    """Decay kernel xi on the grid k h, permanent impact kappa.

    ``xi_core`` (optional) is used for core events when marks are visible.
    Beyond the grid, xi - 1 is continued as a power law with exponent
    ``tail_exponent`` fitted on the last part of the grid.
    """

    h: float
    xi: np.ndarray
    kappa: float = 1.0
    xi_core: np.ndarray | None = None
    tail_exponent: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        xi = np.asarray(self.xi, dtype=float)
        if np.any(xi < 1.0 - 1e-12):
            raise ValueError("xi must be at least 1")
        if np.any(np.diff(xi) > 1e-12):
            raise ValueError("xi must be nonincreasing")

    @property
    def t(self):
        return self.h * np.arange(np.asarray(self.xi).size)

    def evaluate(self, lag, core: bool = False):
        values = self.xi_core if (core and self.xi_core is not None) else self.xi
        values = np.asarray(values)
        lag = np.asarray(lag, dtype=float)
        horizon = self.h * (values.size - 1)
        out = np.interp(lag, self.t, values)
        far = lag > horizon
        if np.any(far):
            excess = values[-1] - 1.0
            out = np.where(far, 1.0 + excess * (np.maximum(lag, horizon) / horizon)
                           ** (-self.tail_exponent), out)
        return out


def _tail_exponent(t, excess):
    # log-log slope of xi - 1 over the last decade of the grid
    t = np.asarray(t)
    mask = (t >= t[-1] / 10) & (t > 0) & (excess > 0)
    if mask.sum() < 2:
        return 0.0
    slope = np.polyfit(np.log(t[mask]), np.log(excess[mask]), 1)[0]
    return float(max(-slope, 0.0))


def _grid_tail(values, h):
    """int_t^H of a grid kernel by reverse cumulative trapezoid."""
    rev = integrate.cumulative_trapezoid(values[::-1], dx=h, initial=0.0)
    return rev[::-1]


def _powerlaw_remainder(t, values):
    """int_H^inf of a kernel continued as C t^(-1-alpha) past the grid end H."""
    mask = (t >= t[-1] / 10) & (t > 0) & (values > 0)
    if mask.sum() < 2 or values[-1] <= 0:
        return 0.0
    slope = np.polyfit(np.log(t[mask]), np.log(values[mask]), 1)[0]
    alpha = -slope - 1.0
    if alpha <= 0:
        raise ValueError("kernel tail is too heavy for a finite L1 norm")
    return float(values[-1] * t[-1] / alpha)


def propagator_kernel(k2, a: float, grid=None, kappa: float = 1.0,
                      construction: str = "compensator") -> PropagatorSpec:
    """Martingale propagator kernel for a signed flow excited through a k2.

    ``k2`` is a KernelMatrixSpec (exact tail integrals) or a GridKernel
    (trapezoidal tails plus a fitted power-law remainder). ``grid`` is a
    GridKernel-compatible (h, horizon) pair or array of grid times; it
    defaults to the GridKernel's own grid.

    ``construction="resolvent_tail"`` returns 1 + int_t^inf psi2 instead,
    with psi2 the resolvent of a k2. It agrees with the default at t = 0
    only and does not make the price a martingale; it is kept for comparison.
    """
    if construction not in ("compensator", "resolvent_tail"):
        raise ValueError(f"unknown construction {construction!r}")
    h, t = _resolve_grid(k2, grid)
    if isinstance(k2, KernelMatrixSpec):
        norm = k2.k2_norm
        tail = k2.k2_tail(t)
        values = k2.k2(t)
    elif isinstance(k2, GridKernel):
        values = k2(t)
        rem = _powerlaw_remainder(t, values)
        tail = _grid_tail(values, h) + rem
        norm = float(tail[0])
    else:
        raise TypeError("k2 must be a KernelMatrixSpec or GridKernel")
    if not (0.0 <= a < 1.0) or a * norm >= 1.0:
        raise ValueError("need 0 <= a and a ||k2||_1 < 1")
    r = 1.0 / (1.0 - a * norm)
    if construction == "compensator":
        xi = 1.0 + a * r * tail
    else:
        psi = resolvent(GridKernel(h, values), a).values
        ptail = _grid_tail(psi, h)
        # continue psi as a multiple of k2 beyond the grid (same power-law tail)
        ratio = psi[-1] / values[-1] if values[-1] > 0 else 0.0
        ptail = ptail + ratio * (tail[-1])
        xi = 1.0 + ptail
    xi = np.minimum.accumulate(np.maximum(xi, 1.0))
    return PropagatorSpec(h, xi, kappa, None, _tail_exponent(t, xi - 1.0))


def two_layer_propagator(params: TwoLayerParams, h: float, horizon: float,
                         kappa: float = 1.0) -> PropagatorSpec:
    """Mark-aware martingale kernels for the full model (reaction and core events)."""
    n = int(round(horizon / h))
    t = h * np.arange(n + 1)
    km = params.reaction_matrix
    a0, a1 = params.a0, params.a1
    r = 1.0 / (1.0 - a1 * km.k2_norm)
    c = r / (1.0 - a0)
    react = 1.0 + a1 * r * km.k2_tail(t)
    core = react + a0 * c * params.core_kernel.tail(t)
    tail_exp = _tail_exponent(t, core - 1.0)
    return PropagatorSpec(h, react, kappa, core, tail_exp)


def _resolve_grid(k2, grid):
    if grid is None:
        if isinstance(k2, GridKernel):
            return k2.h, k2.t
        raise ValueError("a grid is required for analytic kernels")
    if isinstance(grid, GridKernel):
        return grid.h, grid.t
    if isinstance(grid, tuple) and len(grid) == 2:
        h, horizon = grid
        return float(h), float(h) * np.arange(int(round(horizon / h)) + 1)
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2 or g[0] != 0:
        raise ValueError("grid must start at 0")
    return float(g[1] - g[0]), g


def price_path(stream: EventStream, prop: PropagatorSpec, grid, p0: float = 0.0,
               mark_aware: bool = True) -> PathGrid:
    """P_t = p0 + kappa sum_{events s <= t} sign(s) xi(t - s) on the grid.

    With ``mark_aware`` and a spec carrying ``xi_core``, core events use
    ``xi_core`` and reaction events ``xi``.
    """
    g = grid.t if isinstance(grid, PathGrid) else np.asarray(grid, dtype=float)
    if g.size and (g[-1] > stream.T * (1 + 1e-12) or g[0] < 0):
        raise ValueError("grid must lie within the stream horizon")
    signs = stream.signs().astype(float)
    is_core = (stream.marks == CB) | (stream.marks == CS)
    use_core = mark_aware and prop.xi_core is not None
    idx = np.searchsorted(stream.times, g, side="right")
    out = np.full(g.size, float(p0))
    for k, (t, n) in enumerate(zip(g, idx)):
        if n == 0:
            continue
        lag = t - stream.times[:n]
        s = signs[:n]
        if use_core:
            core = is_core[:n]
            val = np.sum(s[core] * prop.evaluate(lag[core], core=True))
            val += np.sum(s[~core] * prop.evaluate(lag[~core]))
        else:
            val = np.sum(s * prop.evaluate(lag))
        out[k] += prop.kappa * val
    return PathGrid(g, {"P": out})


def _check_h0(H0):
    if not (0.75 <= H0 < 1.0):
        raise ValueError(f"H0 must lie in [3/4, 1), got {H0}")


def mi_curve(H0: float, grid) -> PathGrid:
    """Normalised impact t^(2-2H0) during execution, t^(2-2H0) - (t-1)^(2-2H0) after."""
    _check_h0(H0)
    t = np.asarray(grid, dtype=float)
    if np.any(t < 0):
        raise ValueError("grid must be nonnegative")
    e = 2.0 - 2.0 * H0
    after = t > 1.0
    out = t ** e
    out[after] = t[after] ** e - (t[after] - 1.0) ** e
    return PathGrid(t, {"MI": out})


def vol_hurst(H0: float) -> float:
    """Hurst exponent 2 H0 - 3/2 of the volatility."""
    _check_h0(H0)
    return 2.0 * H0 - 1.5


def impact_exponent(H0: float) -> float:
    _check_h0(H0)
    return 2.0 - 2.0 * H0


def volume_hurst(H0: float) -> float:
    """Roughness H0 - 1/2 of the unsigned volume rate."""
    if not (0.5 < H0 < 1.0):
        raise ValueError("H0 must lie in (1/2, 1)")
    return H0 - 0.5


def _pair_difference(seed, params, prop, rate, duration, horizon, grid):
    # the matched metaorder path minus its baseline is the price of the extra cluster
    rng = generator(child_seed(seed, 3))
    n_roots = rng.poisson(rate * duration)
    roots = np.sort(rng.uniform(0.0, duration, size=n_roots))
    cluster = simulate_cluster(params, roots, horizon, seed)
    return price_path(cluster, prop, grid)["P"]


def metaorder_experiment(params: TwoLayerParams, prop: PropagatorSpec, rate: float,
                         duration: float, M: int, seed, horizon: float | None = None,
                         n_grid: int = 90, fit_range=(0.1, 1.0), threads: int = 1,
                         min_paths: int = 100):
    """Average price deviation of a constant-rate buy metaorder.

    Extra core buys arrive as a Poisson stream of intensity ``rate`` on
    [0, duration] and are branched exactly like core immigrants. Each of the
    M pairs shares its baseline noise with the metaorder run (separate random
    stream for the injected clusters), and prices are linear in the flow, so
    the pair difference is the price of the injected clusters alone.

    Returns (curve, exponent): the mean deviation on normalised time
    t / duration in (0, horizon / duration], with columns "MI" and "se", and
    the least-squares slope of log MI against log t on ``fit_range``.
    """
    if not rate >= 0 or not duration > 0:
        raise ValueError("need rate >= 0 and duration > 0")
    horizon = 3.0 * duration if horizon is None else float(horizon)
    if duration > horizon / 2:
        raise ValueError("duration must be at most half the horizon")
    if M < min_paths:
        raise ValueError(f"need at least {min_paths} matched pairs")
    grid = np.linspace(0.0, horizon, n_grid + 1)
    if rate == 0:
        zeros = np.zeros(grid.size)
        return PathGrid(grid / duration, {"MI": zeros, "se": zeros}), float("nan")
    diffs = np.array(map_paths(_pair_difference, M, seed, threads, params=params, prop=prop,
                               rate=rate, duration=duration, horizon=horizon, grid=grid))
    mean = diffs.mean(axis=0)
    se = diffs.std(axis=0, ddof=1) / np.sqrt(M)
    peak = np.max(np.abs(mean))
    if peak == 0 or np.max(se) > 0.2 * peak:
        raise InsufficientPathsError(
            f"standard error {np.max(se):.3g} exceeds 20% of the peak {peak:.3g}; raise M")
    tn = grid / duration
    curve = PathGrid(tn, {"MI": mean, "se": se})
    lo, hi = fit_range
    mask = (tn >= lo - 1e-12) & (tn <= hi + 1e-12) & (mean > 0)
    exponent = float(np.polyfit(np.log(tn[mask]), np.log(mean[mask]), 1)[0])
    return curve, exponent
