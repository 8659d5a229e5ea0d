"""Nearly-unstable parameter scheme and the rescalings of simulated flows.

The limit constants are mapped to finite-horizon Hawkes parameters by
reading the asymptotic relations as equalities at every T:

    1 - a0 = lambda0 K0 Gamma(1 - alpha0) / alpha0 * T^(-alpha0)
    nu     = mu0 alpha0 / (K0 Gamma(1 - alpha0)) * T^(alpha0 - 1)
    1 - a1 = lambda1 T^(-alpha1),   alpha1 = 2 alpha0
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .paths import PathGrid

__all__ = [
    "LimitParams",
    "FiniteHorizonParams",
    "HorizonTooSmallError",
    "finite_horizon_params",
    "core_factor",
    "unsigned_factor",
    "signed_factor",
    "rescale_core",
    "rescale_unsigned",
    "rescale_signed",
]


class HorizonTooSmallError(ValueError):
    """The horizon T is too short for the scheme to give subcritical parameters."""


@dataclass(frozen=True)
class LimitParams:
    alpha0: float
    lambda0: float = 1.0
    mu0: float = 1.0
    lambda1: float = 1.0
    K0: float | None = None
    mu1: float | None = None

    def __post_init__(self):
        if not (0.25 < self.alpha0 < 0.5):
            raise ValueError(f"alpha0 must lie in (1/4, 1/2), got {self.alpha0}")
        for name in ("lambda0", "mu0", "lambda1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.K0 is None:
            # default shifted-Pareto kernel has tail constant alpha0
            object.__setattr__(self, "K0", self.alpha0)
        if not self.K0 > 0:
            raise ValueError("K0 must be positive")
        derived = self._derived_mu1()
        if self.mu1 is None:
            object.__setattr__(self, "mu1", derived)
        elif abs(self.mu1 - derived) > 1e-8 * derived:
            raise ValueError(
                f"mu1={self.mu1} contradicts the scheme, which forces mu1={derived!r}")

    def _derived_mu1(self):
        g = math.gamma(1.0 - self.alpha0)
        return self.mu0 * self.alpha0 ** 2 / (self.lambda0 * self.K0 ** 2 * g ** 2)

    @property
    def alpha1(self) -> float:
        return 2.0 * self.alpha0

    @property
    def H0(self) -> float:
        return 2.0 * self.alpha0

    @property
    def H1(self) -> float:
        return self.alpha1 - 0.5


@dataclass(frozen=True)
class FiniteHorizonParams:
    T: float
    nu_T: float
    a0_T: float
    a1_T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.nu_T > 0:
            raise HorizonTooSmallError(f"nu_T={self.nu_T} is not positive")
        for name in ("a0_T", "a1_T"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise HorizonTooSmallError(f"{name}={v} is outside (0, 1) at T={self.T}")


def finite_horizon_params(lp: LimitParams, T: float) -> FiniteHorizonParams:
    if not T > 0:
        raise HorizonTooSmallError("T must be positive")
    g = math.gamma(1.0 - lp.alpha0)
    one_minus_a0 = lp.lambda0 * lp.K0 * g / lp.alpha0 * T ** (-lp.alpha0)
    nu = lp.mu0 * lp.alpha0 / (lp.K0 * g) * T ** (lp.alpha0 - 1.0)
    one_minus_a1 = lp.lambda1 * T ** (-lp.alpha1)
    return FiniteHorizonParams(T=float(T), nu_T=nu, a0_T=1.0 - one_minus_a0,
                               a1_T=1.0 - one_minus_a1)


def core_factor(fh: FiniteHorizonParams) -> float:
    return (1.0 - fh.a0_T) / (fh.T * fh.nu_T)


def unsigned_factor(fh: FiniteHorizonParams) -> float:
    return core_factor(fh) * (1.0 - fh.a1_T)


def signed_factor(fh: FiniteHorizonParams) -> float:
    return math.sqrt(unsigned_factor(fh))


def _rescale(path: PathGrid, fh: FiniteHorizonParams, factor: float) -> PathGrid:
    if path.t[0] < 0 or path.horizon > fh.T * (1 + 1e-12):
        raise ValueError("path must live on [0, T]")
    return path.rescaled(1.0 / fh.T, factor)


def rescale_core(path: PathGrid, fh: FiniteHorizonParams) -> PathGrid:
    """Time t -> t / T and values times (1 - a0) / (T nu)."""
    return _rescale(path, fh, core_factor(fh))


def rescale_unsigned(path: PathGrid, fh: FiniteHorizonParams) -> PathGrid:
    """Time t -> t / T and values times (1 - a0)(1 - a1) / (T nu)."""
    return _rescale(path, fh, unsigned_factor(fh))


def rescale_signed(path: PathGrid, fh: FiniteHorizonParams) -> PathGrid:
    """Time t -> t / T and values times sqrt((1 - a0)(1 - a1) / (T nu))."""
    return _rescale(path, fh, signed_factor(fh))
