"""Reversible NOT/CNOT/Toffoli circuits for one cat-map step.

Bit layout (little-endian inside each register)::

    bits [0, nq)        register i
    bits [nq, 2nq)      register j
    bit  2nq            carry ancilla

One step is two in-place Cuccaro ripple-carry adders modulo ``2**nq``:
``j += i`` then ``i += j``.  Each adder is a MAJ ladder followed by the
mirrored UMA ladder, 3 + 3 gates per bit, so a step emits exactly
``GATES_PER_BIT * nq`` gates with ``GATES_PER_BIT = 12``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import ConsistencyError, StructuralError, ValidationError
from .lattice import LatticeSize, _as_size

NOT, CNOT, TOFFOLI = "NOT", "CNOT", "TOFFOLI"
KIND_CODES = {NOT: 0, CNOT: 1, TOFFOLI: 2}
_N_CONTROLS = {NOT: 0, CNOT: 1, TOFFOLI: 2}

#: Gates emitted per register bit by ``build_step_circuit``.
GATES_PER_BIT = 12
N_ANCILLA = 1


@dataclass(frozen=True)
class Gate:
    kind: str
    controls: tuple[int, ...]
    target: int

    def __post_init__(self):
        if self.kind not in _N_CONTROLS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if len(self.controls) != _N_CONTROLS[self.kind]:
            raise ValidationError(f"{self.kind} takes {_N_CONTROLS[self.kind]} controls")
        bits = (*self.controls, self.target)
        if len(set(bits)) != len(bits) or min(bits) < 0:
            raise ValidationError(f"bad bit indices {bits} for {self.kind}")

    @property
    def bits(self) -> tuple[int, ...]:
        """Touched bits, controls first then the target (the noise slot order)."""
        return (*self.controls, self.target)

    def __str__(self):
        return " ".join([self.kind, *map(str, self.bits)])


def gate(kind: str, *bits: int) -> Gate:
    """``gate("CNOT", 0, 3)``: last index is the target."""
    return Gate(kind, tuple(int(b) for b in bits[:-1]), int(bits[-1]))


@dataclass(frozen=True)
class Circuit:
    nq: int
    width: int
    gates: tuple[Gate, ...] = field(default=())

    def __post_init__(self):
        if self.width < 2 * self.nq:
            raise StructuralError(f"width {self.width} cannot hold two {self.nq}-bit registers")
        if self.width > 62:
            raise StructuralError("circuits wider than 62 bits are not supported")
        for g in self.gates:
            if max(g.bits) >= self.width:
                raise StructuralError(f"{g} touches a bit outside width {self.width}")

    def __len__(self):
        return len(self.gates)

    @property
    def n_ancilla(self) -> int:
        return self.width - 2 * self.nq

    @cached_property
    def table(self) -> np.ndarray:
        """``(G, 4)`` int64 array ``[kind, control0, control1, target]`` with -1 padding."""
        out = np.full((len(self.gates), 4), -1, dtype=np.int64)
        for k, g in enumerate(self.gates):
            out[k, 0] = KIND_CODES[g.kind]
            out[k, 1 : 1 + len(g.controls)] = g.controls
            out[k, 3] = g.target
        return out

    def repeat(self, times: int) -> "Circuit":
        return Circuit(self.nq, self.width, self.gates * int(times))

    def then(self, other: "Circuit") -> "Circuit":
        if (other.nq, other.width) != (self.nq, self.width):
            raise StructuralError("cannot concatenate circuits of different shape")
        return Circuit(self.nq, self.width, self.gates + other.gates)

    def dump(self) -> str:
        return "".join(f"{g}\n" for g in self.gates)


def parse_dump(text: str, nq: int, width: int) -> Circuit:
    gates = []
    for line in text.splitlines():
        parts = line.split()
        if parts:
            gates.append(gate(parts[0].upper(), *map(int, parts[1:])))
    return Circuit(nq, width, tuple(gates))


def _maj(c: int, b: int, a: int) -> list[Gate]:
    return [gate(CNOT, a, b), gate(CNOT, a, c), gate(TOFFOLI, c, b, a)]


def _uma(c: int, b: int, a: int) -> list[Gate]:
    return [gate(TOFFOLI, c, b, a), gate(CNOT, a, c), gate(CNOT, c, b)]


def adder_gates(a: Sequence[int], b: Sequence[int], ancilla: int) -> list[Gate]:
    """In-place ``b += a mod 2**len(a)``; ``a`` and the zeroed ancilla are restored."""
    if len(a) != len(b):
        raise StructuralError("adder registers must have equal length")
    carries = [ancilla, *a[:-1]]
    out: list[Gate] = []
    for k in range(len(a)):
        out += _maj(carries[k], b[k], a[k])
    for k in reversed(range(len(a))):
        out += _uma(carries[k], b[k], a[k])
    return out


def register_bits(nq: int) -> tuple[list[int], list[int]]:
    return list(range(nq)), list(range(nq, 2 * nq))


def build_step_circuit(size) -> Circuit:
    size = _as_size(size)
    nq = size.nq
    ri, rj = register_bits(nq)
    anc = 2 * nq
    gates = adder_gates(ri, rj, anc) + adder_gates(rj, ri, anc)
    return Circuit(nq, 2 * nq + N_ANCILLA, tuple(gates))


def empty_circuit(size, width: int | None = None) -> Circuit:
    size = _as_size(size)
    return Circuit(size.nq, 2 * size.nq + N_ANCILLA if width is None else width, ())


def invert(c: Circuit) -> Circuit:
    # every gate in the set is an involution
    return Circuit(c.nq, c.width, tuple(reversed(c.gates)))


def encode(p, nq: int, width: int) -> np.ndarray:
    return int_to_bits(encode_int(p, nq), width)


def decode(bits: Iterable[int], nq: int) -> tuple[int, int]:
    return decode_int(bits_to_int(bits), nq)


def encode_int(p, nq: int) -> int:
    n = 1 << nq
    i, j = int(p[0]), int(p[1])
    if not (0 <= i < n and 0 <= j < n):
        raise ValidationError(f"point {(i, j)} outside the {n}x{n} lattice")
    return i | (j << nq)


def decode_int(x: int, nq: int) -> tuple[int, int]:
    mask = (1 << nq) - 1
    return int(x) & mask, (int(x) >> nq) & mask


def int_to_bits(x: int, width: int) -> np.ndarray:
    return ((int(x) >> np.arange(width)) & 1).astype(np.uint8)


def bits_to_int(bits: Iterable[int]) -> int:
    return sum(int(b) << k for k, b in enumerate(bits))


def apply_classical(c: Circuit, b) -> np.ndarray:
    """Run the gates in order on one bit-string; returns a new ``uint8`` array."""
    bits = np.asarray(b, dtype=np.uint8)
    if bits.shape != (c.width,):
        raise StructuralError(f"bit-string of length {bits.size} for circuit of width {c.width}")
    if np.any(bits > 1):
        raise ValidationError("bit-string entries must be 0 or 1")
    out = _kernels.apply_gates_noiseless(np.array([bits_to_int(bits)], dtype=np.int64), c.table)
    return int_to_bits(int(out[0]), c.width)


def as_permutation(c: Circuit, size=None) -> tuple[np.ndarray, np.ndarray]:
    """Cell map of the circuit as two ``(N, N)`` grids ``(i', j')`` indexed by ``[i, j]``.

    Ancillas start at zero and must end at zero, and the result must be a bijection.
    """
    size = LatticeSize(c.nq) if size is None else _as_size(size)
    if size.nq != c.nq:
        raise StructuralError(f"circuit nq={c.nq} does not match lattice nq={size.nq}")
    if size.nq > 8:
        raise ValidationError("permutation tables are limited to nq <= 8")
    n, nq = size.N, size.nq
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    x = (i | (j << nq)).astype(np.int64).ravel()
    y = _kernels.apply_gates_noiseless(x, c.table)
    if np.any(y >> (2 * nq)):
        raise ConsistencyError("ancilla bits left dirty by the circuit")
    if np.unique(y).size != y.size:
        raise ConsistencyError("circuit action on the data registers is not a bijection")
    mask = n - 1
    return (y & mask).reshape(n, n), ((y >> nq) & mask).reshape(n, n)
