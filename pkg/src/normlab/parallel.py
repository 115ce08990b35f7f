"""Ordered fan-out of independent per-factor computations.

``NORMLAB_THREADS`` caps the worker count. Results are always assembled in
input order and every task is deterministic, so the worker count never
changes a value.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "NORMLAB_THREADS"


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(ENV_THREADS, "").strip()
        if env:
            try:
                workers = int(env)
            except ValueError:
                workers = None
        if workers is None:
            workers = os.cpu_count() or 1
    return max(1, int(workers))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    items = list(items)
    n = min(resolve_workers(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
