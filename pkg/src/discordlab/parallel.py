"""Deterministic process-level parallelism.

Results are returned in task order and each task is a pure function of its
inputs, so output is byte-identical whatever the worker count. The
``DISCORDLAB_THREADS`` environment variable caps the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count(requested: "int | None" = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("DISCORDLAB_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def parallel_map(
    fn: Callable[[T], R],
    tasks: Sequence[T],
    threads: "int | None" = None,
    progress: "Callable[[int, int], None] | None" = None,
) -> list[R]:
    """Ordered map over tasks, fanned out over processes when threads > 1.

    ``progress(done, total)`` is called as results arrive; it has no effect
    on the results themselves.
    """
    n = worker_count(threads)
    total = len(tasks)
    if n == 1 or total <= 1:
        out = []
        for i, t in enumerate(tasks):
            out.append(fn(t))
            if progress is not None:
                progress(i + 1, total)
        return out
    chunk = max(1, total // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        out = []
        for r in pool.map(fn, tasks, chunksize=chunk):
            out.append(r)
            if progress is not None:
                progress(len(out), total)
        return out
