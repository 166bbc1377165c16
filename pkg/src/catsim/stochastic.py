"""The incoherent protocol: sample a cell, push it through the same gates, histogram."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, rng
from .circuit import Circuit, encode_int
from .coherent import PERFECT, NoiseModel
from .errors import ConsistencyError, StructuralError, ValidationError
from .lattice import LatticePoint, LatticeSize, _as_size, check_density, size_of
from .parallel import map_chunks


@dataclass(frozen=True, eq=False)
class EmpiricalDensity:
    counts: np.ndarray  # (N, N) int64, indexed [i, j]
    total: int

    def normalize(self) -> np.ndarray:
        if self.total <= 0:
            raise ValidationError("cannot normalize an empty histogram")
        return self.counts / float(self.total)

    @property
    def N(self) -> int:
        return self.counts.shape[0]


def sample_initial_cells(d, count: int, seed: int, start: int = 0) -> np.ndarray:
    """``count`` cells ``(i, j)`` drawn from ``d``; draw ``k`` depends only on ``(seed, start + k)``."""
    d = check_density(d)
    nq = size_of(d).nq
    y = rng.sample_cells(d.ravel(order="F"), rng.uniforms(seed, rng.INITIAL, count, start))
    return np.stack([y & ((1 << nq) - 1), y >> nq], axis=1).astype(np.int64)


def sample_initial(d, seed: int) -> LatticePoint:
    i, j = sample_initial_cells(d, 1, seed)[0]
    return LatticePoint(int(i), int(j))


def _run_encoded(x: np.ndarray, program: Circuit, noise: NoiseModel, start: int, backend) -> np.ndarray:
    if noise.p_x == 0.0:
        # Z errors act trivially on definite bit-strings
        y = _kernels.apply_gates_noiseless(x, program.table, backend)
        if np.any(y >> (2 * program.nq)):
            raise ConsistencyError("noiseless trajectory left ancilla bits set")
        return y
    keys = rng.trajectory_keys(noise.master_seed, start, x.size)
    return _kernels.classical_noisy(x, program.table, keys, noise.p_x, backend)


def run_trajectories(points, c: Circuit, steps: int = 1, noise: NoiseModel = PERFECT,
                     start: int = 0, workers: int = 1, backend=None) -> np.ndarray:
    """Final cells for trajectories ``start, start+1, ...`` beginning at ``points``."""
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    n = 1 << c.nq
    if pts.size and (pts.min() < 0 or pts.max() >= n):
        raise ValidationError(f"points outside the {n}x{n} lattice")
    program = c.repeat(steps) if steps != 1 else c
    x = pts[:, 0] | (pts[:, 1] << c.nq)
    y = map_chunks(lambda s, k: _run_encoded(x[s:s + k], program, noise, start + s, backend),
                   x.size, workers)
    mask = n - 1
    return np.stack([y & mask, (y >> c.nq) & mask], axis=1).astype(np.int64)


def run_trajectory(p, c: Circuit, steps: int = 1, noise: NoiseModel = PERFECT,
                   trajectory_seed: int = 0, backend=None) -> LatticePoint:
    encode_int(p, c.nq)  # validates p
    (i, j), = run_trajectories([p], c, steps, noise, start=trajectory_seed, backend=backend)
    return LatticePoint(int(i), int(j))


def estimate_density(points, size) -> EmpiricalDensity:
    size = _as_size(size)
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    if pts.size and (pts.min() < 0 or pts.max() >= size.N):
        raise ValidationError("points outside the lattice")
    flat = np.bincount(pts[:, 0] * size.N + pts[:, 1], minlength=size.cells)
    return EmpiricalDensity(flat.reshape(size.N, size.N).astype(np.int64), int(pts.shape[0]))


def sample_trajectories(d, c: Circuit, noise: NoiseModel, count: int, seed: int,
                        steps: int = 1, workers: int = 1, backend=None) -> np.ndarray:
    """The classical protocol end to end: ``count`` sampled starts pushed through ``c``."""
    d = check_density(d)
    if size_of(d).nq != c.nq:
        raise StructuralError("density and circuit sizes differ")
    starts = sample_initial_cells(d, count, seed)
    return run_trajectories(starts, c, steps, noise, workers=workers, backend=backend)
