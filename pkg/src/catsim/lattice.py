"""Exact integer arithmetic for the discretized Arnold cat map on an N x N torus.

Convention: ``j' = (i + j) mod N`` first, then ``i' = (i + j') mod N``,
i.e. the unimodular matrix [[2, 1], [1, 1]] acting on ``(i, j)``.

Densities are plain ``(N, N)`` float arrays indexed ``d[i, j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import StructuralError, ValidationError

#: Absolute tolerance used when checking that a density sums to one.
NORM_TOL = 1e-9

CAT_MATRIX = ((2, 1), (1, 1))


@dataclass(frozen=True)
class LatticeSize:
    """Register size ``nq`` and the derived cell count per axis ``N = 2**nq``."""

    nq: int

    def __post_init__(self):
        if not isinstance(self.nq, (int, np.integer)) or self.nq < 1:
            raise ValidationError(f"nq must be a positive integer, got {self.nq!r}")

    @property
    def N(self) -> int:
        return 1 << int(self.nq)

    @property
    def cells(self) -> int:
        return self.N * self.N

    def contains(self, p) -> bool:
        return 0 <= p[0] < self.N and 0 <= p[1] < self.N


class LatticePoint(NamedTuple):
    i: int
    j: int


def _as_size(size) -> LatticeSize:
    return size if isinstance(size, LatticeSize) else LatticeSize(int(size))


def _check_point(p, size: LatticeSize) -> None:
    if not size.contains(p):
        raise ValidationError(f"point {tuple(p)} outside the {size.N}x{size.N} lattice")


def forward(p, size) -> LatticePoint:
    size = _as_size(size)
    _check_point(p, size)
    n = size.N
    i, j = int(p[0]), int(p[1])
    j2 = (i + j) % n
    return LatticePoint((i + j2) % n, j2)


def inverse(p, size) -> LatticePoint:
    size = _as_size(size)
    _check_point(p, size)
    n = size.N
    i2, j2 = int(p[0]), int(p[1])
    i = (i2 - j2) % n
    return LatticePoint(i, (j2 - i) % n)


def iterate(p, t: int, size) -> LatticePoint:
    """Apply ``forward`` ``t`` times (``inverse`` ``-t`` times when ``t < 0``)."""
    size = _as_size(size)
    step = forward if t >= 0 else inverse
    q = LatticePoint(int(p[0]), int(p[1]))
    _check_point(q, size)
    for _ in range(abs(int(t))):
        q = step(q, size)
    return q


def forward_cells(i: np.ndarray, j: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``forward`` on integer arrays."""
    j2 = (i + j) % n
    return (i + j2) % n, j2


def inverse_cells(i: np.ndarray, j: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    i0 = (i - j) % n
    return i0, (j - i0) % n


def iterate_cells(i, j, t: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    step = forward_cells if t >= 0 else inverse_cells
    for _ in range(abs(int(t))):
        i, j = step(i, j, n)
    return i, j


def check_density(d, size=None) -> np.ndarray:
    """Return ``d`` as a float array after checking shape, sign and normalization."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise StructuralError(f"density must be a square grid, got shape {d.shape}")
    n = d.shape[0]
    if n < 2 or n & (n - 1):
        raise StructuralError(f"grid side must be a power of two >= 2, got {n}")
    if size is not None and _as_size(size).N != n:
        raise StructuralError(f"density side {n} does not match N={_as_size(size).N}")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ValidationError("density must be finite and nonnegative")
    total = float(d.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise ValidationError(f"density sums to {total!r}, expected 1")
    return d


def size_of(d: np.ndarray) -> LatticeSize:
    return LatticeSize(int(d.shape[0]).bit_length() - 1)


def pushforward(d, t: int, size=None) -> np.ndarray:
    """Transport every cell mass along ``iterate``: ``d'[iterate(p, t)] = d[p]``."""
    d = check_density(d, size)
    n = d.shape[0]
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i2, j2 = iterate_cells(i, j, t, n)
    out = np.zeros_like(d)
    out[i2, j2] = d
    return out


# Common initial densities.

def delta(p, size) -> np.ndarray:
    size = _as_size(size)
    _check_point(p, size)
    d = np.zeros((size.N, size.N))
    d[p[0], p[1]] = 1.0
    return d


def uniform(size) -> np.ndarray:
    size = _as_size(size)
    return np.full((size.N, size.N), 1.0 / size.cells)


def block(i0: int, j0: int, w: int, h: int, size) -> np.ndarray:
    """Uniform mass on a ``w x h`` rectangle with corner ``(i0, j0)``, wrapping around the torus."""
    size = _as_size(size)
    if w < 1 or h < 1 or w > size.N or h > size.N:
        raise ValidationError(f"block extent {w}x{h} does not fit N={size.N}")
    d = np.zeros((size.N, size.N))
    ii = (i0 + np.arange(w)) % size.N
    jj = (j0 + np.arange(h)) % size.N
    d[np.ix_(ii, jj)] = 1.0
    return d / d.sum()


def gauss(i0: float, j0: float, sigma: float, size) -> np.ndarray:
    """Wrapped Gaussian bump; strictly positive on every cell."""
    size = _as_size(size)
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    n = size.N
    k = np.arange(n)
    di = np.minimum(np.abs(k - i0) % n, n - np.abs(k - i0) % n)
    dj = np.minimum(np.abs(k - j0) % n, n - np.abs(k - j0) % n)
    d = np.exp(-(di[:, None] ** 2 + dj[None, :] ** 2) / (2.0 * sigma**2))
    return d / d.sum()


def parse_density(spec: str, size) -> np.ndarray:
    """Parse ``delta:i,j``, ``uniform``, ``block:i0,j0,w,h`` or ``gauss:i0,j0,sigma``."""
    size = _as_size(size)
    kind, _, args = spec.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "uniform" and not args:
            return uniform(size)
        vals = [v for v in args.split(",") if v.strip()]
        if kind == "delta" and len(vals) == 2:
            return delta((int(vals[0]), int(vals[1])), size)
        if kind == "block" and len(vals) == 4:
            return block(*(int(v) for v in vals), size)
        if kind == "gauss" and len(vals) == 3:
            return gauss(*(float(v) for v in vals), size)
    except ValueError as exc:
        raise ValidationError(f"bad density spec {spec!r}: {exc}") from None
    raise ValidationError(f"bad density spec {spec!r}")
