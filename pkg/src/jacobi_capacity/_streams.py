"""Deterministic random streams and order-insensitive reductions.

Every Monte Carlo routine in the package derives the generator for work unit
``t`` from ``(seed, t)`` alone, so results never depend on how units are
scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

# Trial count per stream for the large vectorised estimators (ladders, moments).
BLOCK = 4096


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator for work unit `index` under master `seed`."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        return 1
    if workers < 0:
        raise ValueError("workers must be >= 0")
    if workers == 0:
        return os.cpu_count() or 1
    return workers


def map_ordered(fn: Callable[[int], T], n: int, workers: int | None = 1) -> list[T]:
    """``[fn(0), ..., fn(n-1)]`` evaluated on up to `workers` threads."""
    workers = resolve_workers(workers)
    if workers == 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def block_sizes(total: int, block: int = BLOCK) -> list[int]:
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


def mean_and_se(values: Sequence[float] | np.ndarray) -> tuple[float, float]:
    """Compensated mean and standard error (unbiased variance).

    ``math.fsum`` is exact up to final rounding, making the result independent
    of the order in which the values were produced.
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    mean = math.fsum(x.tolist()) / n
    if n == 1:
        return mean, 0.0
    dev = x - mean
    var = math.fsum((dev * dev).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)
