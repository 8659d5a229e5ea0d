"""Excitation kernels, their eigen-decomposition and the Hawkes resolvent.

Two families of unit-mass densities on [0, inf) are supported:

``shifted_pareto``
    alpha (1 + t)^(-1 - alpha), completely monotone with tail
    int_t^inf phi = (1 + t)^(-alpha), so the tail constant is K = alpha.
``exp_mixture``
    sum_j w_j r_j exp(-r_j t) with sum_j w_j = 1. Markovian, used to
    cross-check the branching sampler against thinning.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, signal

__all__ = [
    "KernelSpec",
    "KernelMatrixSpec",
    "GridKernel",
    "ResolventError",
    "shifted_pareto",
    "exp_mixture",
    "kernel_eval",
    "offspring_delay",
    "eigen_kernels",
    "convolve_trapezoid",
    "resolvent",
]

FAMILIES = ("shifted_pareto", "exp_mixture")
_NORM_TOL = 1e-8


class ResolventError(RuntimeError):
    """Picard iteration for the resolvent failed to reach its tolerance."""


@dataclass(frozen=True)
class KernelSpec:
    """Unit-mass excitation density.

    ``tail_alpha`` is the power-law tail exponent (shifted_pareto); the
    exp_mixture family uses ``weights`` and ``rates`` instead.
    """

    family: str = "shifted_pareto"
    tail_alpha: float | None = None
    weights: tuple = ()
    rates: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if self.family == "shifted_pareto":
            a = self.tail_alpha
            if a is None or not (0.0 < a < 1.0):
                raise ValueError(f"tail_alpha must lie in (0, 1), got {a}")
        else:
            w = np.asarray(self.weights, dtype=float)
            r = np.asarray(self.rates, dtype=float)
            if w.ndim != 1 or w.size == 0 or w.shape != r.shape:
                raise ValueError("exp_mixture needs non-empty weights and rates of equal length")
            if np.any(w <= 0) or np.any(r <= 0):
                raise ValueError("exp_mixture weights and rates must be positive")
            object.__setattr__(self, "weights", tuple(float(x) for x in w))
            object.__setattr__(self, "rates", tuple(float(x) for x in r))
        norm = self._quad_norm()
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"kernel L1 norm is {norm:.12g}, expected 1")

    def _quad_norm(self):
        # split at 1 so the heavy tail is handled by the infinite-range rule
        head, _ = integrate.quad(self.density, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12)
        tail, _ = integrate.quad(self.density, 1.0, np.inf, epsabs=1e-13, epsrel=1e-12,
                                 limit=200)
        return head + tail

    @property
    def tail_constant(self) -> float:
        """K with t^alpha int_t^inf phi -> K / alpha; equals alpha for shifted_pareto."""
        if self.family != "shifted_pareto":
            raise ValueError("exp_mixture kernels have no power-law tail")
        return float(self.tail_alpha)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "shifted_pareto":
            a = self.tail_alpha
            return a * (1.0 + t) ** (-1.0 - a)
        w = np.asarray(self.weights)
        r = np.asarray(self.rates)
        return np.sum(w * r * np.exp(-np.multiply.outer(t, r)), axis=-1)

    def tail(self, t):
        """int_t^inf phi(s) ds."""
        t = np.asarray(t, dtype=float)
        if self.family == "shifted_pareto":
            return (1.0 + t) ** (-self.tail_alpha)
        w = np.asarray(self.weights)
        r = np.asarray(self.rates)
        return np.sum(w * np.exp(-np.multiply.outer(t, r)), axis=-1)

    def cdf(self, t):
        """int_0^t phi(s) ds, computed without cancellation for small t."""
        t = np.asarray(t, dtype=float)
        if self.family == "shifted_pareto":
            return -np.expm1(-self.tail_alpha * np.log1p(t))
        w = np.asarray(self.weights)
        r = np.asarray(self.rates)
        return np.sum(w * -np.expm1(-np.multiply.outer(t, r)), axis=-1)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw i.i.d. delays from the density."""
        if self.family == "shifted_pareto":
            return offspring_delay(self, rng.random(size))
        w = np.asarray(self.weights)
        r = np.asarray(self.rates)
        comp = rng.choice(w.size, size=size, p=w / w.sum()) if w.size > 1 else np.zeros(size, int)
        return rng.exponential(1.0, size=size) / r[comp]


def shifted_pareto(alpha: float) -> KernelSpec:
    return KernelSpec("shifted_pareto", tail_alpha=alpha)


def exp_mixture(weights, rates) -> KernelSpec:
    return KernelSpec("exp_mixture", weights=tuple(weights), rates=tuple(rates))


def kernel_eval(spec: KernelSpec, t):
    """Density value phi(t) for t >= 0 (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("kernel_eval is defined for t >= 0 only")
    out = spec.density(arr)
    return float(out) if arr.ndim == 0 else out


def offspring_delay(spec: KernelSpec, u):
    """Inverse distribution function of the kernel at u in [0, 1)."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(arr >= 1) or np.any(np.isnan(arr)):
        raise ValueError("offspring_delay needs u in [0, 1)")
    if spec.family == "shifted_pareto":
        # (1 - u)^(-1/alpha) - 1, written to stay accurate as u -> 0
        out = np.expm1(-np.log1p(-arr) / spec.tail_alpha)
    else:
        out = np.vectorize(lambda v: _mixture_quantile(spec, v), otypes=[float])(arr)
    return float(out) if arr.ndim == 0 else out


def _mixture_quantile(spec, u):
    if u == 0.0:
        return 0.0
    hi = 1.0 / min(spec.rates)
    while spec.cdf(hi) < u:
        hi *= 2.0
    return optimize.brentq(lambda x: float(spec.cdf(x)) - u, 0.0, hi, xtol=1e-14, rtol=1e-14)


@dataclass(frozen=True)
class KernelMatrixSpec:
    """Symmetric reaction kernel matrix [[phi1, phi2], [phi2, phi1]].

    ``phi1``/``phi2`` are unit-mass shapes and ``mass1``/``mass2`` their L1
    masses; same-sign excitation uses phi1, cross-sign phi2. A zero cross
    mass (phi2 identically zero) is allowed.
    """

    phi1: KernelSpec
    mass1: float
    phi2: KernelSpec
    mass2: float

    def __post_init__(self):
        if not (0.0 < self.mass1 <= 1.0) or not (0.0 <= self.mass2 < 1.0):
            raise ValueError("masses must satisfy 0 < mass1 <= 1 and 0 <= mass2 < 1")
        if abs(self.mass1 + self.mass2 - 1.0) > _NORM_TOL:
            raise ValueError(
                f"mass1 + mass2 must equal 1 (spectral radius one), got {self.mass1 + self.mass2}")
        if not self.mass1 > self.mass2:
            raise ValueError("same-sign mass must exceed cross-sign mass")

    @property
    def k2_norm(self) -> float:
        return self.mass1 - self.mass2

    def phi1_eval(self, t):
        return self.mass1 * self.phi1.density(t)

    def phi2_eval(self, t):
        return self.mass2 * self.phi2.density(t)

    def k1(self, t):
        return self.phi1_eval(t) + self.phi2_eval(t)

    def k2(self, t):
        return self.phi1_eval(t) - self.phi2_eval(t)

    def k2_tail(self, t):
        """int_t^inf k2(s) ds."""
        return self.mass1 * self.phi1.tail(t) - self.mass2 * self.phi2.tail(t)


@dataclass(frozen=True)
class GridKernel:
    """Kernel values on the uniform grid t_k = k h, k = 0..n."""

    h: float
    values: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return self.h * np.arange(self.values.size)

    @property
    def horizon(self) -> float:
        return self.h * (self.values.size - 1)

    def l1_norm(self) -> float:
        """Trapezoidal integral over the grid."""
        return float(integrate.trapezoid(self.values, dx=self.h))

    def __call__(self, t):
        return np.interp(t, self.t, self.values)

    @classmethod
    def from_function(cls, func, h: float, horizon: float) -> "GridKernel":
        n = int(round(horizon / h))
        if n < 1 or not h > 0:
            raise ValueError("grid needs h > 0 and horizon >= h")
        return cls(h, np.asarray(func(h * np.arange(n + 1)), dtype=float))


def eigen_kernels(spec: KernelMatrixSpec, h: float = 0.01, horizon: float = 100.0):
    """k1 = phi1 + phi2 and k2 = phi1 - phi2 sampled on the grid k h, k <= horizon / h."""
    k1 = GridKernel.from_function(spec.k1, h, horizon)
    k2 = GridKernel.from_function(spec.k2, h, horizon)
    return k1, k2


def convolve_trapezoid(f: np.ndarray, g: np.ndarray, h: float) -> np.ndarray:
    """Trapezoidal approximation of int_0^{t_k} f(t_k - s) g(s) ds on a uniform grid."""
    n = f.size
    full = signal.fftconvolve(f, g)[:n]
    return h * (full - 0.5 * f * g[0] - 0.5 * f[0] * g)


def resolvent(kernel, a: float, h: float | None = None, horizon: float | None = None,
              tol: float = 1e-6, max_iter: int = 10_000) -> GridKernel:
    """psi = sum_{k >= 1} (a phi)^{*k} on a uniform grid, by Picard iteration.

    ``kernel`` is a GridKernel, or a KernelSpec together with ``h`` and
    ``horizon``. Iterates psi <- a phi + a phi * psi (trapezoidal
    convolution) until the sup-norm change is below ``tol``.
    """
    if isinstance(kernel, KernelSpec):
        if h is None or horizon is None:
            raise ValueError("h and horizon are required for an analytic kernel")
        kernel = GridKernel.from_function(kernel.density, h, horizon)
    if not isinstance(kernel, GridKernel):
        raise TypeError("kernel must be a GridKernel or KernelSpec")
    if not (0.0 <= a < 1.0):
        raise ValueError(f"a must lie in [0, 1), got {a}")
    phi = kernel.values
    h = kernel.h
    if a * kernel.l1_norm() >= 1.0:
        raise ValueError("a * ||phi||_1 must be below one")
    base = a * phi
    psi = base.copy()
    step = np.inf
    for _ in range(max_iter):
        new = base + a * convolve_trapezoid(phi, psi, h)
        step = float(np.max(np.abs(new - psi)))
        psi = new
        if step < tol * 1e-2:
            break
    residual = float(np.max(np.abs(psi - base - a * convolve_trapezoid(phi, psi, h))))
    if not residual < tol:
        raise ResolventError(
            f"resolvent iteration stalled with residual {residual:.3g} (tolerance {tol:g})")
    return GridKernel(h, psi)
