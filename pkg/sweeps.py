"""
Sweep orchestration shared by the frequency sweeps.

Each sweep point is an independent, picklable call. Points run inline or on a
process pool; failures are captured per point and results always come back
in input order, whatever the worker count.
"""

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence, Union

from tqdm import tqdm
from tqdm.asyncio import tqdm_asyncio

logger = logging.getLogger(__name__)

PointResult = Union[Any, Exception]

async def _guarded(future) -> PointResult:
    try:
        return await future
    except Exception as e:
        return e

async def _gather_points(func: Callable[[Any], Any], items: Sequence[Any], workers: int,
                         description: str) -> List[PointResult]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [_guarded(loop.run_in_executor(pool, func, item)) for item in items]
        return await tqdm_asyncio.gather(*futures, desc=description, total=len(futures))

def run_points(func: Callable[[Any], Any], items: Sequence[Any], workers: int = 1,
               description: str = "sweep") -> List[PointResult]:
    """
    Evaluate func on every item, capturing exceptions per point.

    Args:
        func: Module-level callable (or functools.partial of one) taking one item
        items: Sweep points
        workers: Process count; 1 or less runs inline
        description: Progress bar label

    Returns:
        List aligned with items holding each result or the exception it raised
    """
    if workers <= 1 or len(items) <= 1:
        results: List[PointResult] = []
        for item in tqdm(items, desc=description, disable=len(items) <= 1):
            try:
                results.append(func(item))
            except Exception as e:
                results.append(e)
        return results
    logger.info(f"Dispatching {len(items)} points to {workers} workers")
    return asyncio.run(_gather_points(func, items, workers, description))
