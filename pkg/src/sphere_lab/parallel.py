"""Index-ordered fan-out of chunked work over worker processes."""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

THREADS_ENV = "SPHERE_LAB_THREADS"
CHUNK_SIZE = 256


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: ``SPHERE_LAB_THREADS`` wins, then the argument, then the core count."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    if workers is None:
        return os.cpu_count() or 1
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return int(workers)


def map_chunks(
    fn: Callable[[int, int], np.ndarray],
    count: int,
    workers: int | None = None,
    chunk_size: int = CHUNK_SIZE,
) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over ``[0, count)`` in fixed chunks and concatenate.

    ``fn`` must be picklable and must derive its randomness from the absolute
    index range only; chunk boundaries do not depend on ``workers``.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    bounds = [(s, min(s + chunk_size, count)) for s in range(0, count, chunk_size)]
    n_workers = min(resolve_workers(workers), len(bounds))
    if n_workers == 1:
        parts = [fn(s, e) for s, e in bounds]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=n_workers, mp_context=ctx) as pool:
            parts = list(pool.map(fn, *zip(*bounds)))
    return np.concatenate(parts)
