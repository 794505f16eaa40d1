# utils/pool.py

import logging
import pickle
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

log = logging.getLogger(__name__)


def _picklable(obj) -> bool:
    try:
        pickle.dumps(obj)
    except Exception:  # noqa: BLE001
        return False
    return True


def map_chunks(fn: Callable[[T], R], chunks: Sequence[T], threads: int = 1) -> List[R]:
    """
    Order-preserving map over work chunks.

    threads <= 1 runs inline. Otherwise a process pool is used; payloads that
    cannot be pickled (closures in Custom steps) go to a thread pool instead.
    Results come back in chunk order, so output never depends on scheduling.
    """
    chunks = list(chunks)
    if threads <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]

    workers = min(threads, len(chunks))
    if _picklable(fn) and _picklable(chunks[0]):
        pool_type = ProcessPoolExecutor
    else:
        log.info("[pool] payload not picklable, using %d threads", workers)
        pool_type = ThreadPoolExecutor

    with pool_type(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def split_range(n: int, parts: int) -> List[range]:
    """Contiguous index ranges covering 0..n-1 (at most `parts` of them)."""
    parts = max(1, min(parts, n)) if n else 1
    step, extra = divmod(n, parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        out.append(range(start, stop))
        start = stop
    return out
