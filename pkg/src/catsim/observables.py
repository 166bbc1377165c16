"""Diagonal observables, density harmonics and the statistics used to compare protocols.

DFT normalization is unitary everywhere (``norm="ortho"``, ``1/N`` for a 2D
``N x N`` grid), so ``harmonics[0, 0] = sum(d) / N``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import chi2

from .coherent import QuantumState, apply_fourier, born_distribution
from .errors import NotApplicableError, StructuralError, ValidationError
from .lattice import check_density
from .stochastic import EmpiricalDensity

#: Minimum combined count per pooled chi-square cell.
MIN_POOLED_COUNT = 5


def _block_sum(grid: np.ndarray, factor: int) -> np.ndarray:
    n = grid.shape[0]
    if factor < 1 or n % factor:
        raise ValidationError(f"coarse factor {factor} does not divide N={n}")
    m = n // factor
    return grid.reshape(m, factor, m, factor).sum(axis=(1, 3))


def coarse_grain(d, factor: int) -> np.ndarray:
    """Sum masses over ``factor x factor`` blocks; cell ``(i, j)`` lands in ``(i // f, j // f)``."""
    return _block_sum(check_density(d), int(factor))


def coarse_grain_counts(e: EmpiricalDensity, factor: int) -> EmpiricalDensity:
    return EmpiricalDensity(_block_sum(e.counts, int(factor)), e.total)


def density_harmonics(d) -> np.ndarray:
    return np.fft.fft2(check_density(d), norm="ortho")


def amplitude_power_spectrum(s: QuantumState) -> np.ndarray:
    """``|DFT(a)|^2``: depends on the phases, so it carries no classical information."""
    return born_distribution(apply_fourier(s))


def _same_grid(d1: np.ndarray, d2: np.ndarray) -> None:
    if d1.shape != d2.shape:
        raise StructuralError(f"grid shapes differ: {d1.shape} vs {d2.shape}")


def tv_distance(d1, d2) -> float:
    d1, d2 = np.asarray(d1, dtype=np.float64), np.asarray(d2, dtype=np.float64)
    _same_grid(d1, d2)
    check_density(d1)
    check_density(d2)
    return 0.5 * float(np.abs(d1 - d2).sum())


def harmonics_gap(d1, d2) -> float:
    """L-infinity distance between the density harmonics of two densities."""
    d1, d2 = np.asarray(d1, dtype=np.float64), np.asarray(d2, dtype=np.float64)
    _same_grid(d1, d2)
    return float(np.max(np.abs(density_harmonics(d1) - density_harmonics(d2))))


def spectrum_gap(s1: QuantumState, s2: QuantumState) -> float:
    return float(np.max(np.abs(amplitude_power_spectrum(s1) - amplitude_power_spectrum(s2))))


def harmonics_sampling_bound(n: int, m1: int, m2: int, delta: float = 1e-3) -> float:
    """Hoeffding bound on the harmonics L-inf gap of two empirical densities of one distribution.

    Holds with probability at least ``1 - delta`` jointly over all ``n * n``
    coefficients (union bound over real and imaginary parts).
    """
    cells = n * n
    eps = math.sqrt(2.0 * (1.0 / m1 + 1.0 / m2) * math.log(4.0 * cells / delta))
    return math.sqrt(2.0) * eps / n


def pool_cells(r: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge lowest-count cells until every pooled cell has combined count >= 5.

    Cells empty in both samples are dropped.  Cells are visited in ascending
    combined count (ties by position) and accumulated into the open pool; a
    pool closes once it reaches the minimum.  A final undersized pool is
    merged into the last closed one.
    """
    r = np.asarray(r, dtype=np.int64).ravel()
    s = np.asarray(s, dtype=np.int64).ravel()
    tot = r + s
    order = np.argsort(tot, kind="stable")
    order = order[tot[order] > 0]
    rb, sb = [], []
    acc_r = acc_s = 0
    for k in order:
        acc_r += int(r[k])
        acc_s += int(s[k])
        if acc_r + acc_s >= MIN_POOLED_COUNT:
            rb.append(acc_r)
            sb.append(acc_s)
            acc_r = acc_s = 0
    if acc_r + acc_s:
        if not rb:
            rb.append(0)
            sb.append(0)
        rb[-1] += acc_r
        sb[-1] += acc_s
    return np.array(rb, dtype=np.int64), np.array(sb, dtype=np.int64)


def chi_square_two_sample(e1: EmpiricalDensity, e2: EmpiricalDensity) -> tuple[float, float]:
    """Two-sample chi-square on pooled cells; ``dof = pooled cells - 1``."""
    _same_grid(e1.counts, e2.counts)
    r, s = pool_cells(e1.counts, e2.counts)
    if r.size < 2:
        raise NotApplicableError(f"only {r.size} pooled cell(s); chi-square needs at least 2")
    R, S = float(r.sum()), float(s.sum())
    if R == 0 or S == 0:
        raise NotApplicableError("one of the samples is empty")
    k1, k2 = math.sqrt(S / R), math.sqrt(R / S)
    stat = float(np.sum((k1 * r - k2 * s) ** 2 / (r + s)))
    return stat, float(chi2.sf(stat, r.size - 1))
