"""Scaling limits of the order-flow model and fractional Gaussian reference paths.

The limit laws are stochastic Volterra equations driven by the Mittag-Leffler
density f = f^{alpha,lambda}; for instance the core buy flow solves

    F+_t = g(t) + c int_0^t f(t - s) Z+_s ds,   <Z+> = F+,

with g(t) = int_0^t s f(t - s) ds and c = (mu0 lambda0)^(-1/2). They are
discretised on [0, 1] with an explicit scheme: the convolution uses exact
cell integrals of f (differences of the Mittag-Leffler CDF) against the
left-point value of Z, and each Gaussian increment of Z has the variance of
the latest increment of the nondecreasing solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from .paths import PathGrid
from .rng import child_seed, generator, path_seeds
from .scaling import LimitParams
from .specialfn import ml_cdf, ml_cdf_integral

__all__ = [
    "MIN_STEPS",
    "VolterraGrid",
    "MixedFbmParams",
    "EmbeddingError",
    "simulate_core_limit",
    "simulate_reaction_limit",
    "simulate_signed_limit",
    "signed_coefficients",
    "fgn_autocovariance",
    "simulate_fbm",
    "simulate_mixed_fbm",
]

MIN_STEPS = 2 ** 8


class EmbeddingError(RuntimeError):
    """Neither circulant embedding nor Cholesky could produce the Gaussian noise."""


@dataclass(frozen=True)
class VolterraGrid:
    """Uniform grid on [0, 1] with the cell integrals of f^{alpha,lambda}."""

    n_steps: int
    alpha: float
    lam: float
    weights: np.ndarray = field(init=False, repr=False)
    mean_path: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < MIN_STEPS:
            raise ValueError(f"n_steps must be an integer >= {MIN_STEPS}")
        t = self.t
        rho = ml_cdf(self.alpha, self.lam, t)
        # W_m = int_{(m-1)dt}^{m dt} f, m = 1..n
        object.__setattr__(self, "weights", np.diff(rho))
        object.__setattr__(self, "mean_path", ml_cdf_integral(self.alpha, self.lam, t))

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_steps + 1)

    def drift_weights(self):
        """Product-trapezoid weights for int_0^t f(t - s) F_s ds with F linear per cell.

        Returns (near, far): the lag-m cell [(m-1)dt, m dt] contributes
        near[m-1] F(t - (m-1)dt) + far[m-1] F(t - m dt).
        """
        t = self.t
        dt = self.dt
        rho = ml_cdf(self.alpha, self.lam, t)
        R = ml_cdf_integral(self.alpha, self.lam, t)
        dR = np.diff(R)
        near = (dR - rho[:-1] * dt) / dt
        far = (rho[1:] * dt - dR) / dt
        return near, far

    def convolve_drift(self, F: np.ndarray) -> np.ndarray:
        """int_0^{t_k} f(t_k - s) F_s ds on every grid point, for each row of F."""
        near, far = self.drift_weights()
        F = np.atleast_2d(F)
        n = self.n_steps
        a = signal.fftconvolve(F, near[None, :], axes=-1)
        b = signal.fftconvolve(F, far[None, :], axes=-1)
        k = np.arange(1, n + 1)
        near_pad = np.append(near, 0.0)
        out = np.zeros_like(F)
        # sum_m near[m-1] F[k-m+1] + far[m-1] F[k-m], m = 1..k
        out[:, 1:] = a[:, k] - F[:, :1] * near_pad[k] + b[:, k - 1]
        return out


def _noise(seeds, n):
    """Standard normals, one row per path, each from that path's own stream."""
    return np.stack([generator(s).standard_normal(n) for s in seeds])


def _volterra_counting(base: np.ndarray, weights: np.ndarray, coef: float,
                       noise: np.ndarray, n_drivers: int = 1):
    """Explicit scheme for Y_k = base_k + coef sum_{j<k} W_{k-j} Z_j.

    ``noise`` has shape (n_drivers, P, n). Z is the sum of ``n_drivers``
    independent Gaussian martingales, each with quadratic variation equal to
    the running maximum of Y. Returns (Y monotone, drivers) with drivers of
    shape (n_drivers, P, n + 1).
    """
    n_paths = base.shape[0]
    n = base.shape[1] - 1
    drivers = np.zeros((n_drivers, n + 1, n_paths))
    Z = np.zeros((n + 1, n_paths))
    Y = np.zeros((n + 1, n_paths))
    base_t = np.ascontiguousarray(base.T)
    w_rev = weights[::-1].copy()
    prev = np.zeros(n_paths)
    for k in range(1, n + 1):
        raw = base_t[k] + coef * (w_rev[n - k:] @ Z[:k])
        cur = np.maximum(raw, prev)
        sd = np.sqrt(cur - prev)
        for d in range(n_drivers):
            drivers[d, k] = drivers[d, k - 1] + sd * noise[d, :, k - 1]
        Z[k] = drivers[:, k].sum(axis=0)
        Y[k] = cur
        prev = cur
    return Y.T, np.transpose(drivers, (0, 2, 1))


def simulate_core_limit(alpha0: float, lambda0: float, mu0: float, grid, seed,
                        n_paths: int = 1, noise: bool = True):
    """Limit of the rescaled core flows.

    Returns (F, V) with F = F+ + F- (unsigned) and V = F+ - F- (signed);
    F also carries the components "F_plus", "F_minus", and V carries the
    martingales "Z_F" and "Z_V". Leading axis of every series is the path.
    ``noise=False`` gives the deterministic part 2 g(t).
    """
    if not (0.0 < alpha0 < 1.0) or alpha0 == 0.5:
        raise ValueError("alpha0 must lie in (0, 1/2) or (1/2, 1)")
    if not isinstance(grid, VolterraGrid):
        grid = VolterraGrid(int(grid), alpha0, lambda0)
    if grid.alpha != alpha0 or grid.lam != lambda0:
        raise ValueError("grid was built for different (alpha, lambda)")
    n = grid.n_steps
    coef = 1.0 / np.sqrt(mu0 * lambda0)
    base = np.tile(grid.mean_path, (2 * n_paths, 1))
    if noise:
        xi = _noise(path_seeds(seed, n_paths), 2 * n).reshape(n_paths, 2, n)
        xi = xi.transpose(1, 0, 2).reshape(1, 2 * n_paths, n)
    else:
        xi = np.zeros((1, 2 * n_paths, n))
    Y, Zs = _volterra_counting(base, grid.weights, coef, xi)
    fp, fm = Y[:n_paths], Y[n_paths:]
    zp, zm = Zs[0, :n_paths], Zs[0, n_paths:]
    t = grid.t
    F = PathGrid(t, {"F": fp + fm, "F_plus": fp, "F_minus": fm})
    V = PathGrid(t, {"V": fp - fm, "Z_F": zp + zm, "Z_V": zp - zm})
    return F, V


def simulate_reaction_limit(alpha1: float, lambda1: float, mu1: float, F, grid, seed,
                            noise: bool = True) -> PathGrid:
    """Limit of the rescaled reaction flow, X = (N+ + N-) / 2 in the limit.

    ``F`` is the unsigned core limit (PathGrid with series "F", or an array)
    on the same grid. Returns a PathGrid with "X", "U" = 2 X, and the two
    independent driving martingales "Z_plus", "Z_minus" (each with quadratic
    variation X) plus "Z_diff" = Z_plus - Z_minus.
    """
    if not (0.0 < alpha1 <= 1.0):
        raise ValueError("alpha1 must lie in (0, 1]")
    if not isinstance(grid, VolterraGrid):
        grid = VolterraGrid(int(grid), alpha1, lambda1)
    if grid.alpha != alpha1 or grid.lam != lambda1:
        raise ValueError("grid was built for different (alpha, lambda)")
    if isinstance(F, PathGrid):
        if F.t.size != grid.n_steps + 1 or not np.allclose(F.t, grid.t):
            raise ValueError("F lives on a different grid")
        F = F["F"]
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[-1] != grid.n_steps + 1:
        raise ValueError("F lives on a different grid")
    n = grid.n_steps
    n_paths = F.shape[0]
    coef = 1.0 / (2.0 * np.sqrt(lambda1 * mu1))
    base = 0.5 * grid.convolve_drift(F)
    if noise:
        xi = _noise(path_seeds(seed, n_paths), 2 * n).reshape(n_paths, 2, n).transpose(1, 0, 2)
    else:
        xi = np.zeros((2, n_paths, n))
    X, Zs = _volterra_counting(base, grid.weights, coef, xi, n_drivers=2)
    return PathGrid(grid.t, {"X": X, "U": 2.0 * X, "Z_plus": Zs[0], "Z_minus": Zs[1],
                             "Z_diff": Zs[0] - Zs[1]})


def signed_coefficients(lp: LimitParams, k2_norm: float):
    """(c1, c2) of S = c1 V + c2 (Z+ - Z-)."""
    if not (0.0 <= k2_norm < 1.0):
        raise ValueError("||phi1|| - ||phi2|| must lie in [0, 1)")
    c2 = 1.0 / (1.0 - k2_norm)
    c1 = np.sqrt(lp.lambda1 * lp.mu1) * k2_norm * c2
    return float(c1), float(c2)


def simulate_signed_limit(lp: LimitParams, matrix, V, Zdiff, grid=None) -> PathGrid:
    """Limit of the rescaled signed flow, S = c1 V + c2 (Z+ - Z-).

    ``matrix`` is a KernelMatrixSpec (or the number ||phi1|| - ||phi2||);
    ``V`` and ``Zdiff`` are PathGrids (series "V" and "Z_diff") or arrays on
    the same grid.
    """
    k2_norm = matrix if isinstance(matrix, (int, float)) else matrix.k2_norm
    c1, c2 = signed_coefficients(lp, k2_norm)
    t = None
    if isinstance(V, PathGrid):
        t = V.t
        V = V["V"]
    if isinstance(Zdiff, PathGrid):
        if t is not None and not V.shape[-1] == Zdiff.t.size:
            raise ValueError("V and Zdiff live on different grids")
        t = Zdiff.t if t is None else t
        Zdiff = Zdiff["Z_diff"]
    V = np.asarray(V, dtype=float)
    Zdiff = np.asarray(Zdiff, dtype=float)
    if V.shape != Zdiff.shape:
        raise ValueError("V and Zdiff live on different grids")
    if grid is not None:
        gt = grid.t if isinstance(grid, VolterraGrid) else np.asarray(grid)
        if gt.size != V.shape[-1]:
            raise ValueError("grid does not match the inputs")
        t = gt
    if t is None:
        t = np.linspace(0.0, 1.0, V.shape[-1])
    return PathGrid(t, {"S": c1 * V + c2 * Zdiff})


def fgn_autocovariance(H: float, n_lags: int, dt: float = 1.0) -> np.ndarray:
    """gamma(k) = 0.5 (|k+1|^2H + |k-1|^2H - 2|k|^2H) dt^2H for k = 0..n_lags-1."""
    k = np.arange(n_lags, dtype=float)
    h2 = 2.0 * H
    return 0.5 * (np.abs(k + 1) ** h2 + np.abs(k - 1) ** h2 - 2.0 * k ** h2) * dt ** h2


def simulate_fbm(H: float, n: int, dt: float, seed, n_paths: int = 1,
                 method: str = "auto") -> PathGrid:
    """Fractional Brownian motion on n steps of size dt, exact in law.

    Fractional Gaussian noise comes from circulant embedding (Davies-Harte)
    and is cumulated; Cholesky is the fallback for n <= 2^10. The PathGrid
    holds "B" (the path, starting at 0) with one row per path.
    """
    if not (0.0 < H < 1.0):
        raise ValueError("H must lie in (0, 1)")
    if n < 1 or not dt > 0:
        raise ValueError("need n >= 1 and dt > 0")
    if method not in ("auto", "circulant", "cholesky"):
        raise ValueError(f"unknown method {method!r}")
    if method != "cholesky" and n & (n - 1) and method == "circulant":
        raise ValueError("circulant embedding needs n to be a power of two")
    seeds = path_seeds(seed, n_paths)
    rngs = [generator(s) for s in seeds]
    gamma = fgn_autocovariance(H, n + 1, dt)
    noise = None
    if method in ("auto", "circulant"):
        noise = _fgn_circulant(gamma, rngs, n_paths)
    if noise is None:
        if n > 2 ** 10:
            raise EmbeddingError("circulant embedding failed and n is too large for Cholesky")
        L = linalg.cholesky(linalg.toeplitz(gamma[:n]), lower=True)
        noise = np.stack([L @ r.standard_normal(n) for r in rngs])
    path = np.zeros((n_paths, n + 1))
    np.cumsum(noise, axis=1, out=path[:, 1:])
    return PathGrid(dt * np.arange(n + 1), {"B": path})


def _fgn_circulant(gamma, rngs, n_paths):
    # circulant first row gamma(0..n), gamma(n-1..1): size 2n
    n = gamma.size - 1
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    if np.min(eig) < -1e-10 * np.max(eig):
        return None
    eig = np.clip(eig, 0.0, None)
    m = row.size
    scale = np.sqrt(eig / m)
    out = np.empty((n_paths, n))
    for p in range(n_paths):
        z = rngs[p].standard_normal(m) + 1j * rngs[p].standard_normal(m)
        out[p] = np.fft.fft(scale * z).real[:n]
    return out


@dataclass(frozen=True)
class MixedFbmParams:
    """S = sigma_W W + sigma_H B^H with independent components."""

    H: float
    sigma_W: float = 1.0
    sigma_H: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.H < 1.0):
            raise ValueError("H must lie in (0, 1)")
        if self.sigma_W < 0 or self.sigma_H < 0:
            raise ValueError("sigmas must be nonnegative")
        if self.sigma_W == 0 and self.sigma_H == 0:
            raise ValueError("at least one sigma must be positive")

    def increment_variance(self, lag_time):
        lag_time = np.asarray(lag_time, dtype=float)
        return self.sigma_W ** 2 * lag_time + self.sigma_H ** 2 * lag_time ** (2 * self.H)


def simulate_mixed_fbm(p: MixedFbmParams, n: int, dt: float, seed, n_paths: int = 1) -> PathGrid:
    """sigma_W W + sigma_H B^H on n steps of size dt; series "S", "W" and "B"."""
    walk = np.zeros((n_paths, n + 1))
    for i, s in enumerate(path_seeds(child_seed(seed, 0), n_paths)):
        walk[i, 1:] = np.cumsum(generator(s).standard_normal(n)) * np.sqrt(dt)
    B = simulate_fbm(p.H, n, dt, child_seed(seed, 1), n_paths)["B"]
    S = p.sigma_W * walk + p.sigma_H * B
    return PathGrid(dt * np.arange(n + 1), {"S": S, "W": walk, "B": B})
