"""Simulation of the two-layer Hawkes order-flow model and path diagnostics.

Core buy/sell flows F+/F- are independent self-exciting processes with
baseline ``nu`` and kernel ``a0 phi0``. Reaction flows N+/N- are excited by
every event (core or reaction): an event of sign s raises the reaction
intensity of sign s by ``a1 phi1`` and that of sign -s by ``a1 phi2``.

The main sampler uses the cluster (immigrant/offspring) representation, one
generation at a time. Randomness comes from three named streams of the seed:
the core layer, the reaction layer and externally injected roots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import KernelMatrixSpec, KernelSpec
from .paths import PathGrid
from .rng import child_seed, generator

__all__ = [
    "MARKS",
    "CB", "CS", "RB", "RS",
    "EventStream",
    "TwoLayerParams",
    "MemoryCapError",
    "UnsupportedKernelError",
    "DEFAULT_EVENT_CAP",
    "simulate_core",
    "simulate_two_layer",
    "simulate_cluster",
    "simulate_thinning",
    "counts_on_grid",
    "intensity_path",
    "compensator_path",
    "martingale_residual",
    "aggregate_flows",
]

CB, CS, RB, RS = 0, 1, 2, 3
MARKS = ("CB", "CS", "RB", "RS")
_SIGN = np.array([1, -1, 1, -1], dtype=np.int8)

DEFAULT_EVENT_CAP = 50_000_000
STREAM_CORE, STREAM_REACTION, STREAM_ROOTS = 0, 1, 2


class MemoryCapError(MemoryError):
    """Expected or realised event count exceeds the configured cap."""


class UnsupportedKernelError(ValueError):
    """Thinning needs exponential-mixture kernels."""


@dataclass
class EventStream:
    """Time-sorted events on [0, T] with marks CB, CS, RB, RS (codes 0..3)."""

    times: np.ndarray
    marks: np.ndarray
    T: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.marks = np.asarray(self.marks, dtype=np.int8)
        if self.times.shape != self.marks.shape or self.times.ndim != 1:
            raise ValueError("times and marks must be 1-d arrays of equal length")
        if self.times.size:
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("event times must be strictly increasing")
            if self.times[0] < 0 or self.times[-1] > self.T:
                raise ValueError("event times must lie in [0, T]")
            if self.marks.min() < 0 or self.marks.max() > 3:
                raise ValueError("marks must be codes 0..3")

    def __len__(self):
        return self.times.size

    def of(self, *marks) -> np.ndarray:
        return self.times[np.isin(self.marks, marks)]

    def signs(self) -> np.ndarray:
        """+1 for buys, -1 for sells."""
        return _SIGN[self.marks]

    def counts(self) -> dict:
        return {m: int(np.sum(self.marks == i)) for i, m in enumerate(MARKS)}

    def swapped(self) -> "EventStream":
        """Same events with buy and sell labels exchanged."""
        return EventStream(self.times.copy(), self.marks ^ 1, self.T)

    def equals(self, other: "EventStream") -> bool:
        return (self.T == other.T and np.array_equal(self.times, other.times)
                and np.array_equal(self.marks, other.marks))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("time,mark\n")
            for t, m in zip(self.times, self.marks):
                fh.write(f"{t:.9f},{MARKS[m]}\n")

    @classmethod
    def from_csv(cls, path, T: float | None = None) -> "EventStream":
        times, marks = [], []
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "time,mark":
                raise ValueError(f"unexpected header {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                t, m = line.split(",")
                times.append(float(t))
                marks.append(MARKS.index(m))
        times = np.asarray(times)
        return cls(times, np.asarray(marks, dtype=np.int8),
                   float(T if T is not None else (times[-1] if times.size else 0.0)))


@dataclass(frozen=True)
class TwoLayerParams:
    """Parameters of the full model. ``a1 = 0`` switches the reaction layer off."""

    nu: float
    a0: float
    core_kernel: KernelSpec
    a1: float
    reaction_matrix: KernelMatrixSpec

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not (0.0 <= self.a0 < 1.0):
            raise ValueError(f"a0 must lie in [0, 1), got {self.a0}")
        if not (0.0 <= self.a1 < 1.0):
            raise ValueError(f"a1 must lie in [0, 1) (reaction spectral radius), got {self.a1}")

    def expected_core_count(self, T: float) -> float:
        """Upper bound 2 nu T / (1 - a0) on the mean number of core events."""
        return 2.0 * self.nu * T / (1.0 - self.a0)

    def expected_total_count(self, T: float) -> float:
        return self.expected_core_count(T) / (1.0 - self.a1)


def _check_cap(expected, cap):
    if expected > cap:
        raise MemoryCapError(
            f"expected {expected:.3g} events exceeds the cap of {cap:.3g}; "
            "shorten T or raise event_cap")


def _offspring(rng, times, signs, mean, kernel, T, flip=False):
    """Children of every parent: Poisson(mean) each, delays from ``kernel``."""
    if mean <= 0 or times.size == 0:
        return times[:0], signs[:0]
    n = rng.poisson(mean, size=times.size)
    total = int(n.sum())
    if total == 0:
        return times[:0], signs[:0]
    ct = np.repeat(times, n) + kernel.sample(rng, total)
    cs = np.repeat(-signs if flip else signs, n)
    keep = ct <= T
    return ct[keep], cs[keep]


def _core_cascade(rng, times, signs, a0, kernel, T, cap, already=0):
    """Roots plus all same-sign core descendants within [0, T]."""
    out_t, out_s = [times], [signs]
    total = already + times.size
    gen_t, gen_s = times, signs
    while gen_t.size:
        gen_t, gen_s = _offspring(rng, gen_t, gen_s, a0, kernel, T)
        total += gen_t.size
        if total > cap:
            raise MemoryCapError(f"event count passed the cap of {cap}")
        out_t.append(gen_t)
        out_s.append(gen_s)
    return np.concatenate(out_t), np.concatenate(out_s)


def _reaction_cascade(rng, times, signs, a1, km, T, cap, already=0):
    """All reaction events descending from the given parents within [0, T]."""
    out_t, out_s = [times[:0]], [signs[:0]]
    total = already
    gen_t, gen_s = times, signs
    while gen_t.size and a1 > 0:
        t1, s1 = _offspring(rng, gen_t, gen_s, a1 * km.mass1, km.phi1, T)
        t2, s2 = _offspring(rng, gen_t, gen_s, a1 * km.mass2, km.phi2, T, flip=True)
        gen_t = np.concatenate([t1, t2])
        gen_s = np.concatenate([s1, s2])
        total += gen_t.size
        if total > cap:
            raise MemoryCapError(f"event count passed the cap of {cap}")
        out_t.append(gen_t)
        out_s.append(gen_s)
    return np.concatenate(out_t), np.concatenate(out_s)


def _immigrants(rng, nu, T):
    n = rng.poisson(2.0 * nu * T)
    t = rng.uniform(0.0, T, size=n)
    s = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)
    return t, s


def _assemble(core_t, core_s, react_t, react_s, T):
    times = np.concatenate([core_t, react_t])
    marks = np.concatenate([
        np.where(core_s > 0, CB, CS),
        np.where(react_s > 0, RB, RS),
    ]).astype(np.int8)
    order = np.argsort(times, kind="stable")
    return EventStream(times[order], marks[order], float(T))


def simulate_core(nu: float, a0: float, kernel: KernelSpec, T: float, seed,
                  event_cap: int = DEFAULT_EVENT_CAP) -> EventStream:
    """Exact sample of the core buy and sell processes on [0, T]."""
    if not nu > 0 or not T > 0:
        raise ValueError("nu and T must be positive")
    if not (0.0 <= a0 < 1.0):
        raise ValueError(f"a0 must lie in [0, 1), got {a0}")
    _check_cap(2.0 * nu * T / (1.0 - a0), event_cap)
    rng = generator(child_seed(seed, STREAM_CORE))
    t, s = _immigrants(rng, nu, T)
    ct, cs = _core_cascade(rng, t, s, a0, kernel, T, event_cap)
    return _assemble(ct, cs, ct[:0], cs[:0], T)


def simulate_two_layer(params: TwoLayerParams, T: float, seed,
                       event_cap: int = DEFAULT_EVENT_CAP) -> EventStream:
    """Exact sample of the full model; its core events equal simulate_core's for the same seed."""
    if not T > 0:
        raise ValueError("T must be positive")
    _check_cap(params.expected_total_count(T), event_cap)
    rng = generator(child_seed(seed, STREAM_CORE))
    t, s = _immigrants(rng, params.nu, T)
    ct, cs = _core_cascade(rng, t, s, params.a0, params.core_kernel, T, event_cap)
    rng_r = generator(child_seed(seed, STREAM_REACTION))
    rt, rs = _reaction_cascade(rng_r, ct, cs, params.a1, params.reaction_matrix, T,
                               event_cap, already=ct.size)
    return _assemble(ct, cs, rt, rs, T)


def simulate_cluster(params: TwoLayerParams, root_times, T: float, seed, root_sign: int = 1,
                     event_cap: int = DEFAULT_EVENT_CAP) -> EventStream:
    """Extra core events at ``root_times`` together with all their descendants.

    Uses its own random stream, so superposing the result on
    ``simulate_two_layer(params, T, seed)`` gives an exact sample of the model
    with these additional core immigrants, coupled to the baseline path.
    """
    rng = generator(child_seed(seed, STREAM_ROOTS))
    rt = np.sort(np.asarray(root_times, dtype=float))
    if rt.size and (rt[0] < 0 or rt[-1] > T):
        raise ValueError("root times must lie in [0, T]")
    rs = np.full(rt.size, 1 if root_sign > 0 else -1, dtype=np.int8)
    ct, cs = _core_cascade(rng, rt, rs, params.a0, params.core_kernel, T, event_cap)
    xt, xs = _reaction_cascade(rng, ct, cs, params.a1, params.reaction_matrix, T,
                               event_cap, already=ct.size)
    return _assemble(ct, cs, xt, xs, T)


def simulate_thinning(params: TwoLayerParams, T: float, seed) -> EventStream:
    """Ogata thinning sample of the model; exponential-mixture kernels only."""
    km = params.reaction_matrix
    kernels = (params.core_kernel, km.phi1, km.phi2)
    if any(k.family != "exp_mixture" for k in kernels):
        raise UnsupportedKernelError("thinning requires exp_mixture kernels throughout")
    rng = generator(child_seed(seed, STREAM_CORE))
    w0, r0 = np.array(params.core_kernel.weights), np.array(params.core_kernel.rates)
    w1, r1 = np.array(km.phi1.weights), np.array(km.phi1.rates)
    w2, r2 = np.array(km.phi2.weights), np.array(km.phi2.rates)
    c0 = params.a0 * w0 * r0
    c1 = params.a1 * km.mass1 * w1 * r1
    c2 = params.a1 * km.mass2 * w2 * r2
    # index 0 = buy side, 1 = sell side
    core_state = np.zeros((2, r0.size))
    same_state = np.zeros((2, r1.size))
    cross_state = np.zeros((2, r2.size))

    def rates():
        lam_core = params.nu + core_state @ c0
        lam_react = same_state @ c1 + cross_state[::-1] @ c2
        return np.array([lam_core[0], lam_core[1], lam_react[0], lam_react[1]])

    t = 0.0
    times, marks = [], []
    lam = rates()
    while True:
        bound = lam.sum()
        dt = rng.exponential(1.0 / bound)
        t += dt
        if t > T:
            break
        core_state *= np.exp(-r0 * dt)
        same_state *= np.exp(-r1 * dt)
        cross_state *= np.exp(-r2 * dt)
        lam = rates()
        u = rng.random() * bound
        if u >= lam.sum():
            continue
        mark = int(np.searchsorted(np.cumsum(lam), u, side="right"))
        side = mark % 2
        if mark < 2:
            core_state[side] += 1.0
        same_state[side] += 1.0
        cross_state[side] += 1.0
        times.append(t)
        marks.append(mark)
        lam = rates()
    return EventStream(np.array(times), np.array(marks, dtype=np.int8), float(T))


def _grid_array(grid):
    if isinstance(grid, PathGrid):
        return grid.t
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("grid must be a 1-d array of at least two points")
    return g


def counts_on_grid(stream: EventStream, grid) -> PathGrid:
    """Right-continuous counting functions of the four event types."""
    g = _grid_array(grid)
    series = {m: np.searchsorted(stream.of(i), g, side="right").astype(float)
              for i, m in enumerate(MARKS)}
    return PathGrid(g, series)


def _lagged_sum(event_times, g, func, chunk=2_000_000):
    """sum over events s < t of func(t - s), for every grid point t."""
    out = np.zeros(g.size)
    if event_times.size == 0:
        return out
    idx = np.searchsorted(event_times, g, side="left")
    for k, (t, n) in enumerate(zip(g, idx)):
        acc = 0.0
        for lo in range(0, n, chunk):
            acc += float(np.sum(func(t - event_times[lo:min(n, lo + chunk)])))
        out[k] = acc
    return out


def _per_type(stream, params, g, core_fn, same_fn, cross_fn):
    km = params.reaction_matrix
    buys = stream.of(CB, RB)
    sells = stream.of(CS, RS)
    out = {}
    for mark, side, own, other in ((CB, 0, buys, sells), (CS, 1, sells, buys)):
        core = stream.of(mark)
        out[MARKS[mark]] = params.a0 * _lagged_sum(core, g, core_fn)
        react = np.zeros(g.size)
        if params.a1 > 0:
            react = params.a1 * (km.mass1 * _lagged_sum(own, g, same_fn)
                                 + km.mass2 * _lagged_sum(other, g, cross_fn))
        out[MARKS[mark + 2]] = react
    return out


def intensity_path(stream: EventStream, params: TwoLayerParams, grid) -> PathGrid:
    """Left-limit intensities of CB, CS, RB, RS on the grid (events strictly before t)."""
    g = _grid_array(grid)
    km = params.reaction_matrix
    out = _per_type(stream, params, g, params.core_kernel.density,
                    km.phi1.density, km.phi2.density)
    out["CB"] = out["CB"] + params.nu
    out["CS"] = out["CS"] + params.nu
    return PathGrid(g, out)


def compensator_path(stream: EventStream, params: TwoLayerParams, grid) -> PathGrid:
    """int_0^t lambda_type, exact: each event contributes a times the kernel CDF of its lag."""
    g = _grid_array(grid)
    km = params.reaction_matrix
    out = _per_type(stream, params, g, params.core_kernel.cdf, km.phi1.cdf, km.phi2.cdf)
    out["CB"] = out["CB"] + params.nu * g
    out["CS"] = out["CS"] + params.nu * g
    return PathGrid(g, out)


def martingale_residual(stream: EventStream, params: TwoLayerParams, grid) -> PathGrid:
    """N_type(t) - Lambda_type(t) for the four event types."""
    counts = counts_on_grid(stream, grid)
    comp = compensator_path(stream, params, grid)
    return PathGrid(counts.t, {m: counts[m] - comp[m] for m in MARKS})


def aggregate_flows(stream: EventStream, grid):
    """(U, S, F, V) on the grid.

    U = F+ + F- + N+ + N-, S = F+ - F- + N+ - N-, F = F+ - F- (signed core)
    and V = F+ + F- (unsigned core). Each is a PathGrid with one series named
    after it.
    """
    c = counts_on_grid(stream, grid)
    fp, fm, np_, nm = c["CB"], c["CS"], c["RB"], c["RS"]
    g = c.t
    return (PathGrid(g, {"U": fp + fm + np_ + nm}),
            PathGrid(g, {"S": fp - fm + np_ - nm}),
            PathGrid(g, {"F": fp - fm}),
            PathGrid(g, {"V": fp + fm}))
