"""Deterministic per-path random streams.

Path i draws its Wiener increments from PCG64 seeded by
SeedSequence(master_seed, spawn_key=(i, 0)) and its Poisson arrival gaps
from spawn_key=(i, 1).  The spawn-key mixing is numpy's documented
SeedSequence construction, so any worker can rebuild any path's streams
from (master_seed, path index) alone; parallel schedules, chunk sizes and
backends all see identical randomness.

Antithetic runs pair path 2k+1 with 2k: the odd path reuses the even
path's stream indices and negates the Wiener increments (arrival times
are shared unchanged).
"""

from __future__ import annotations

import numpy as np

WIENER = 0
ARRIVALS = 1


def stream_index(path: int, antithetic: bool) -> int:
    """The spawn index whose streams drive this path."""
    return (path - path % 2) if antithetic else path


def negate_increments(path: int, antithetic: bool) -> bool:
    return antithetic and path % 2 == 1


def bit_generator(master_seed: int, path: int, purpose: int) -> np.random.PCG64:
    seq = np.random.SeedSequence(master_seed, spawn_key=(path, purpose))
    return np.random.PCG64(seq)


def generator(master_seed: int, path: int, purpose: int) -> np.random.Generator:
    return np.random.Generator(bit_generator(master_seed, path, purpose))


def arrival_times(
    master_seed: int, path: int, lam: float, horizon: float
) -> np.ndarray:
    """Exact Poisson(lam) arrival times in (0, horizon], exponential gaps.

    Consumes the ARRIVALS stream in gap order, drawing until the running
    sum leaves the horizon, exactly as the stepping kernels do.
    """
    rng = generator(master_seed, path, ARRIVALS)
    gaps: list[np.ndarray] = []
    drawn = 0.0
    # block draws do not change the stream values; the stopping test is
    # only "did we draw enough", the exact cut happens on the single
    # sequential cumsum below (same accumulation order as the kernels)
    while drawn <= horizon:
        block = rng.standard_exponential(256) / lam
        gaps.append(block)
        drawn += float(np.sum(block))
    times = np.cumsum(np.concatenate(gaps))
    return times[times <= horizon]
