import os
from concurrent.futures import ThreadPoolExecutor


def n_workers() -> int:
    """Worker cap from ``SFLAB_THREADS`` (unset: 1, ``0``: all cores)."""
    raw = os.environ.get("SFLAB_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        n = 1
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def pmap(fn, items):
    """Order-preserving map; threads help because LAPACK drops the GIL."""
    items = list(items)
    workers = min(n_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
