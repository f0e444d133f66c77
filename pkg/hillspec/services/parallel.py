import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HILLSPEC_THREADS"


def thread_count() -> int:
    """Worker cap from HILLSPEC_THREADS (default 1: serial)"""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"Ignoring non-integer {THREADS_ENV}={raw!r}")
        return 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map fn over items, results in input order.

    numpy/LAPACK release the GIL, so independent solves overlap in threads.
    """
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
