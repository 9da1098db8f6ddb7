import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "EMERGENCE_LAB_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def parallel_map(func, items):
    """``list(map(func, items))`` on a thread pool; output keeps input order."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
