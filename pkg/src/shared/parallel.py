"""
Order-preserving parallel map for independent batch work.

Results come back in input order, so anything derived from them does not
depend on the worker count or on scheduling.
"""

import asyncio
import logging
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


async def gather_ordered(fn: Callable[[T], R], items: List[T], workers: int) -> List[R]:
    semaphore = asyncio.Semaphore(max(1, workers))

    async def run_one(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    return list(await asyncio.gather(*(run_one(item) for item in items)))


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply fn to every item using up to `workers` threads."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return asyncio.run(gather_ordered(fn, items, workers))
    logger.debug("map_ordered called inside a running event loop; running serially")
    return [fn(item) for item in items]
