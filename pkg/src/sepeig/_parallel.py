from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

_MASK64 = (1 << 64) - 1


def counter_rng(seed: int, counter: int) -> np.random.Generator:
    """Counter-based generator: the Philox key packs ``(counter, seed)``.

    Draws for a given ``(seed, counter)`` never depend on how many other
    counters were consumed before, which keeps parallel runs reproducible.
    """
    key = ((int(counter) & _MASK64) << 64) | (int(seed) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def worker_count() -> int:
    raw = os.environ.get("SEPEIG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """``list(map(fn, items))``, threaded when ``SEPEIG_THREADS`` > 1; order is preserved."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
