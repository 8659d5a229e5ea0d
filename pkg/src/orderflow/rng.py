"""Seeded random streams and a deterministic parallel map over Monte Carlo paths.

Every stream is a Philox (counter-based) generator keyed by a
``SeedSequence``; path ``i`` of a batch seeded with ``seed`` always gets the
same stream, so results do not depend on how paths are split across workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

__all__ = ["seed_sequence", "generator", "path_seeds", "child_seed", "map_paths"]


def seed_sequence(seed) -> np.random.SeedSequence:
    if seed is None:
        raise ValueError("an explicit seed is required")
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        return np.random.SeedSequence(int(seed))
    raise TypeError(f"seed must be an int or SeedSequence, got {type(seed).__name__}")


def generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_sequence(seed)))


def path_seeds(seed, n_paths: int) -> list:
    """Independent child sequences for paths 0..n_paths-1 of a batch."""
    root = seed_sequence(seed)
    return [np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (i,))
            for i in range(n_paths)]


def _call(args):
    func, s, kwargs = args
    return func(seed=s, **kwargs)


def map_paths(func, n_paths: int, seed, threads: int = 1, **kwargs) -> list:
    """[func(seed=path_seed_i, **kwargs) for i in range(n_paths)], optionally in parallel.

    ``func`` must be a module-level callable when threads > 1. Output order
    is path order regardless of the worker count.
    """
    seeds = path_seeds(seed, n_paths)
    jobs = [(func, s, kwargs) for s in seeds]
    threads = max(1, int(threads or 1))
    if threads == 1 or n_paths < 2:
        return [_call(j) for j in jobs]
    workers = min(threads, n_paths, os.cpu_count() or 1) or 1
    if workers == 1:
        return [_call(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, jobs, chunksize=max(1, n_paths // (4 * workers))))


# offset keeping named sub-streams apart from the per-path keys above
_STREAM_BASE = 1 << 30


def child_seed(seed, stream: int) -> np.random.SeedSequence:
    """Deterministic named sub-stream ``stream`` of ``seed`` (no spawn counter involved)."""
    root = seed_sequence(seed)
    return np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (_STREAM_BASE + stream,))
