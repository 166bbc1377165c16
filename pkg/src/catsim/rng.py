"""Counter-based random streams.

Every random number is a pure function of ``(key, counter)`` where ``key`` is
derived from a master seed and a path of integer labels, so results never
depend on execution order, chunking or thread count.
"""
from __future__ import annotations

import numpy as np

from ._kernels import _MASK64, mix64_int, mix64_np, uniform_np

# stream labels
INITIAL = 0x1A17
SHOT = 0x5407
NOISE = 0x7015E
QUANTUM = 0x0C0E
CLASSICAL = 0x0C1A
CALIBRATION = 0x0CA1


def derive_key(seed: int, *labels: int) -> int:
    """Fold ``labels`` into ``seed``; distinct label paths give unrelated 64-bit keys."""
    k = mix64_int(int(seed) & _MASK64)
    for lab in labels:
        k = mix64_int(k ^ (int(lab) & _MASK64))
    return k


def trajectory_keys(master_seed: int, start: int, count: int) -> np.ndarray:
    """Noise keys for trajectories ``start .. start+count-1`` of a noise model."""
    base = np.uint64(derive_key(master_seed, NOISE))
    return mix64_np(base ^ np.arange(start, start + count, dtype=np.uint64))


def trajectory_key(master_seed: int, index: int) -> int:
    return int(trajectory_keys(master_seed, index, 1)[0])


def uniforms(seed: int, label: int, count: int, start: int = 0) -> np.ndarray:
    """``count`` uniforms in [0, 1) from stream ``label`` of ``seed``, counters ``start...``."""
    key = np.uint64(derive_key(seed, label))
    return uniform_np(key, np.arange(start, start + count, dtype=np.uint64))


def sample_cells(p_flat: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling of flat indices; zero-probability entries are never returned."""
    cdf = np.cumsum(p_flat)
    k = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(k, np.flatnonzero(p_flat)[-1])
