"""Order-preserving parallel map over independent tasks."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_default_threads = 1


def set_default_threads(threads: int) -> None:
    """Set the worker count used when ``parallel_map`` gets no explicit value."""
    global _default_threads
    _default_threads = max(1, int(threads))


def get_default_threads() -> int:
    return _default_threads


def parallel_map(
    func: Callable[[T], R],
    items: Iterable[T],
    threads: Optional[int] = None,
) -> List[R]:
    """
    Apply ``func`` to every item, returning results in input order.

    NumPy and SciPy release the GIL inside their linear algebra kernels, so a
    thread pool gives real speedups for the matrix-heavy tasks here. The first
    exception raised by any task propagates to the caller.

    Args:
        func: Task function
        items: Task inputs
        threads: Worker count; defaults to the process-wide setting

    Returns:
        List of results aligned with ``items``
    """
    items = list(items)
    workers = threads if threads is not None else _default_threads
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
