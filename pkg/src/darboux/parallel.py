"""Sweep parallelism capped by the DARBOUX_THREADS environment variable.

All per-radius and per-wavenumber evaluations are pure functions of
immutable inputs, so grid sweeps can fan out over a thread pool with no
synchronization.  The default is sequential (DARBOUX_THREADS unset or 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_count", "parallel_map"]


def thread_count() -> int:
    raw = os.environ.get("DARBOUX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    items = list(items)
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
