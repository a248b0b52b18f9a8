"""Process-pool fan-out that returns results in submission order."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "DCSCREEN_WORKERS"


def chunked(items: Sequence[T], size: int) -> List[Sequence[T]]:
    return [items[i:i + size] for i in range(0, len(items), size)]


def map_ordered(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Apply ``func`` to every item, in worker processes when ``workers > 1``.

    ``func`` must be a module-level function so the pool can pickle it.  The
    output order always matches ``items``.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    results: List[R] = [None] * len(items)  # type: ignore[list-item]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as executor:
        futures = {executor.submit(func, item): i for i, item in enumerate(items)}
        done = 0
        for future in as_completed(futures):
            results[futures[future]] = future.result()
            done += 1
            logger.debug("task %d/%d done", done, len(items))
    return results
