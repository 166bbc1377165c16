"""Order-independent chunked execution over trajectory ranges."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

#: Fixed chunk length; results never depend on the worker count.
CHUNK = 4096


def map_chunks(fn: Callable[[int, int], np.ndarray], total: int, workers: int = 1,
               chunk: int = CHUNK) -> np.ndarray:
    """Evaluate ``fn(start, count)`` over ``[0, total)`` and concatenate in order.

    The numba kernels release the GIL, so threads give real parallelism there.
    """
    if total <= 0:
        return np.empty(0, dtype=np.int64)
    spans = [(s, min(chunk, total - s)) for s in range(0, total, chunk)]
    if workers <= 1 or len(spans) == 1:
        parts = [fn(s, n) for s, n in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sn: fn(*sn), spans))
    return np.concatenate(parts)
