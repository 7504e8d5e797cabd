"""
Worker pool helpers.
Results always come back in input order so parallel runs match sequential ones.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1,
                initializer: Optional[Callable] = None, initargs: Tuple = ()) -> List[R]:
    """Apply fn to every item, in a process pool when jobs > 1"""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        if initializer is not None:
            initializer(*initargs)
        return [fn(item) for item in items]

    chunksize = max(1, len(items) // (jobs * 4))
    logger.info(f"Processing {len(items)} items with {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs, initializer=initializer, initargs=initargs) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
