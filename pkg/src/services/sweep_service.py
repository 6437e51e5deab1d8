# src/services/sweep_service.py
"""Worker pool for independent grid cells with an order-preserving merge."""

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from config.settings import Settings, get_settings
from src.utils.errors import InvalidParameter
from src.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class SweepService:
    """Evaluates ``fn`` over a list of cells.

    Results come back in input order whatever the worker count, so outputs do
    not depend on parallelism. ``fn`` and the cells must be picklable when
    more than one worker is used.
    """

    def __init__(self, workers: Optional[int] = None, settings: Optional[Settings] = None):
        settings = settings or get_settings()
        workers = settings.WORKERS if workers is None else workers
        if workers < 1:
            raise InvalidParameter(["workers"], "need at least one worker")
        self.workers = min(workers, os.cpu_count() or 1) if workers > 1 else 1

    def map(self, fn: Callable[[T], R], cells: Iterable[T]) -> List[R]:
        cells = list(cells)
        if self.workers == 1 or len(cells) <= 1:
            return [fn(cell) for cell in cells]

        logger.info(f"Sweep: {len(cells)} cells on {self.workers} workers")
        chunksize = max(1, len(cells) // (4 * self.workers))
        try:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(fn, cells, chunksize=chunksize))
        except Exception as e:
            logger.error(f"✗ Sweep failed: {e}")
            raise
