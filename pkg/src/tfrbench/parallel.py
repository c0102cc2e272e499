"""Bounded, order-preserving worker pool."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_threads(requested=None) -> int:
    """Worker count: ``TFR_THREADS`` wins over the requested value; minimum 1."""
    env = os.environ.get("TFR_THREADS")
    value = env if env not in (None, "") else requested
    try:
        return max(1, int(value)) if value is not None else 1
    except ValueError:
        raise ValueError(f"invalid thread count {value!r}") from None


def pool_map(func, tasks, threads: int = 1):
    """``list(map(func, tasks))``, spread over ``threads`` processes when > 1.

    Results keep task order, so output never depends on the worker count.
    """
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))
