"""
Batched executor shared by the simulator and the parameter sweeps

Jobs are submitted in batches through asyncio.gather; results come back in
submission order, so the worker count never changes what is computed.
"""

import os
import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

WORKERS = int(os.getenv("PERSUASION_WORKERS", "1"))
BATCH_SIZE = int(os.getenv("PERSUASION_BATCH_SIZE", "4"))

Job = TypeVar("Job")
Result = TypeVar("Result")


async def _gather_batches(fn: Callable[[Job], Result], jobs: Sequence[Job], executor, batch_size: int) -> List[Result]:
    loop = asyncio.get_running_loop()
    results: List[Result] = []
    for batch_start in range(0, len(jobs), batch_size):
        batch = jobs[batch_start:batch_start + batch_size]
        batch_num = batch_start // batch_size + 1
        logger.debug(f"   Processing batch {batch_num}/{(len(jobs) - 1) // batch_size + 1}")
        tasks = [loop.run_in_executor(executor, fn, job) for job in batch]
        results.extend(await asyncio.gather(*tasks))
    return results


def run_batched(
    fn: Callable[[Job], Result],
    jobs: Sequence[Job],
    workers: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> List[Result]:
    """Apply a picklable module-level fn to every job, preserving job order"""
    workers = WORKERS if workers is None else workers
    batch_size = BATCH_SIZE if batch_size is None else batch_size
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]

    logger.info(f"🚀 Running {len(jobs)} jobs on {workers} workers (batch size {batch_size * workers})")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return asyncio.run(_gather_batches(fn, jobs, executor, max(1, batch_size * workers)))
