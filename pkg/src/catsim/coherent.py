"""Coherent (state-vector) run of a reversible circuit and diagonal measurement.

A state is a flat complex vector over basis index ``i | j << nq | anc << 2nq``.
States built from a density carry no ancilla bits; running a circuit extends
them with zeroed ancillas and contracts again whenever the ancilla block is
exactly empty.  Noise is unravelled into stochastic trajectories: after each
gate every touched bit independently suffers X with probability ``p_x`` and Z
with probability ``p_z``, using the same draws as the classical protocol.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, rng
from .circuit import Circuit
from .errors import ConsistencyError, StructuralError, ValidationError
from .lattice import LatticeSize, check_density, size_of
from .parallel import map_chunks

NORM_TOL = 1e-12


@dataclass(frozen=True)
class NoiseModel:
    p_x: float = 0.0
    p_z: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        for name in ("p_x", "p_z"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name}={p!r} is not a probability")

    @property
    def noiseless(self) -> bool:
        return self.p_x == 0.0 and self.p_z == 0.0


PERFECT = NoiseModel()


@dataclass(frozen=True, eq=False)
class QuantumState:
    nq: int
    amplitudes: np.ndarray
    n_ancilla: int = 0

    def __post_init__(self):
        a = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (1 << (2 * self.nq + self.n_ancilla),):
            raise StructuralError(f"{a.shape} amplitudes do not fit nq={self.nq}, ancillas={self.n_ancilla}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def N(self) -> int:
        return 1 << self.nq

    @property
    def norm(self) -> float:
        a = self.amplitudes
        return float(np.sum(a.real * a.real + a.imag * a.imag))

    def blocks(self) -> np.ndarray:
        """Amplitudes as ``(2**n_ancilla, N, N)`` indexed ``[anc, i, j]``."""
        n = self.N
        return self.amplitudes.reshape(1 << self.n_ancilla, n, n).transpose(0, 2, 1)

    def grid(self) -> np.ndarray:
        """Data-register amplitudes ``a[i, j]``; only for states without ancillas."""
        if self.n_ancilla:
            raise StructuralError("state carries ancilla bits; use blocks()")
        return self.blocks()[0]


@dataclass(frozen=True)
class MeasurementRecord:
    shots: int
    outcomes: np.ndarray  # (shots, 2) int64 rows (i, j)


def basis_state(p, size) -> QuantumState:
    size = size if isinstance(size, LatticeSize) else LatticeSize(int(size))
    a = np.zeros(size.cells, dtype=np.complex128)
    a[int(p[0]) + size.N * int(p[1])] = 1.0
    return QuantumState(size.nq, a)


def from_grid(amps: np.ndarray) -> QuantumState:
    """State from an ``(N, N)`` amplitude grid ``a[i, j]``; must have unit norm."""
    amps = np.asarray(amps, dtype=np.complex128)
    s = QuantumState(size_of(amps).nq, amps.ravel(order="F"))
    if abs(s.norm - 1.0) > 1e-9:
        raise ValidationError(f"state norm {s.norm!r} is not 1")
    return s


def from_density(d, phases: str = "zero", seed: int = 0) -> QuantumState:
    """Amplitudes ``sqrt(d) * exp(i phi)`` with ``phi`` all zero or drawn from ``seed``."""
    d = check_density(d)
    mod = np.sqrt(d.ravel(order="F"))
    if phases == "zero":
        amps = mod.astype(np.complex128)
    elif phases == "random":
        phi = 2.0 * np.pi * rng.uniforms(seed, rng.QUANTUM, mod.size)
        amps = mod * np.exp(1j * phi)
    else:
        raise ValidationError(f"unknown phase policy {phases!r}")
    return QuantumState(size_of(d).nq, amps)


def _extend(s: QuantumState, c: Circuit) -> np.ndarray:
    if s.nq != c.nq:
        raise StructuralError(f"state nq={s.nq} does not match circuit nq={c.nq}")
    if s.n_ancilla == c.n_ancilla:
        return s.amplitudes
    if s.n_ancilla:
        raise StructuralError(f"state has {s.n_ancilla} ancillas, circuit {c.n_ancilla}")
    a = np.zeros(1 << c.width, dtype=np.complex128)
    a[: s.amplitudes.size] = s.amplitudes
    return a


def _contract(a: np.ndarray, nq: int, n_ancilla: int) -> QuantumState:
    data = 1 << (2 * nq)
    if n_ancilla and not np.any(a[data:]):
        return QuantumState(nq, a[:data].copy())
    return QuantumState(nq, a, n_ancilla)


def apply_circuit_coherent(s: QuantumState, c: Circuit, noise: NoiseModel = PERFECT,
                           trajectory_seed: int = 0, steps: int = 1, backend=None) -> QuantumState:
    """Run ``c`` ``steps`` times on ``s``; with noise this is trajectory ``trajectory_seed``."""
    program = c.repeat(steps) if steps != 1 else c
    a = _extend(s, program)
    if noise.noiseless:
        out = _kernels.coherent_noiseless(a, program.table, backend)
        if s.n_ancilla == 0 and np.any(out[1 << (2 * c.nq):]):
            raise ConsistencyError("noiseless coherent run left ancilla amplitude")
    else:
        key = rng.trajectory_key(noise.master_seed, trajectory_seed)
        out = _kernels.coherent_noisy(a, program.table, key, noise.p_x, noise.p_z, backend)
    return _contract(out, c.nq, c.n_ancilla)


def born_distribution(s: QuantumState) -> np.ndarray:
    """``d[i, j] = sum over ancillas of |a|^2``."""
    b = s.blocks()
    return np.sum(b.real**2 + b.imag**2, axis=0)


def _cells_from_index(y: np.ndarray, nq: int) -> np.ndarray:
    mask = (1 << nq) - 1
    return np.stack([y & mask, (y >> nq) & mask], axis=1).astype(np.int64)


def measure_diagonal(s: QuantumState, shots: int, seed: int = 0) -> MeasurementRecord:
    """``shots`` independent computational-basis outcomes ``(i, j)``."""
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    p = born_distribution(s).ravel(order="F")
    y = rng.sample_cells(p, rng.uniforms(seed, rng.SHOT, shots))
    return MeasurementRecord(shots, _cells_from_index(y, s.nq))


def apply_fourier(s: QuantumState) -> QuantumState:
    """Unitary 2D DFT (``1/N`` overall) of the ``(i, j)`` amplitude grid of each ancilla block."""
    n = s.N
    blocks = s.amplitudes.reshape(1 << s.n_ancilla, n, n)
    out = np.fft.fft2(blocks, axes=(1, 2), norm="ortho")
    return QuantumState(s.nq, out.reshape(-1), s.n_ancilla)


def sample_shots(s: QuantumState, c: Circuit, noise: NoiseModel, shots: int, seed: int,
                 steps: int = 1, workers: int = 1, backend=None) -> MeasurementRecord:
    """The quantum protocol repeated ``shots`` times: one run and one measurement per shot.

    Shot ``k`` uses noise trajectory ``k`` of ``noise`` and measurement draw ``k`` of ``seed``,
    so it does not matter how the shots are split across workers.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    program = c.repeat(steps) if steps != 1 else c
    if noise.noiseless:
        final = apply_circuit_coherent(s, program, backend=backend)
        return measure_diagonal(final, shots, seed)

    a = _extend(s, program)
    table = program.table
    tables = _kernels.prefix_tables(table, a.size) if _kernels.use_windows(table, a.size) else None
    shot_key = rng.derive_key(seed, rng.SHOT)

    def chunk(start, count):
        keys = rng.trajectory_keys(noise.master_seed, start, count)
        u = _kernels.uniform_np(np.uint64(shot_key), np.arange(start, start + count, dtype=np.uint64))
        return _kernels.coherent_shots(a, table, keys, noise.p_x, noise.p_z, u, tables, backend)

    y = map_chunks(chunk, shots, workers)
    return MeasurementRecord(shots, _cells_from_index(y, c.nq))
