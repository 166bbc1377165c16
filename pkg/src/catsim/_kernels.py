"""Hot loops, each in two flavours: numba ``@njit`` and plain numpy.

The numba path is used when numba imports and ``CATSIM_DISABLE_NUMBA`` is
unset (or ``0``); the flag is read at call time so tests can flip it.  Both
paths consume the same counter-based random stream and must agree bit for bit.

Gate tables are ``(G, 4)`` int64 rows ``[kind, control0, control1, target]``
with kind 0=NOT, 1=CNOT, 2=TOFFOLI and -1 for unused controls.  Noise draws
for gate ``g``, touched-bit slot ``s`` and channel ``ch`` (0=X, 1=Z) use
counter ``(4 * g + s) * 2 + ch``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit
except ImportError:  # pragma: no cover
    numba = None

_GOLD = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0

#: Above this many table entries the windowed coherent kernel falls back to gate-by-gate.
WINDOW_TABLE_BUDGET = 1 << 25


def numba_available() -> bool:
    return numba is not None


def active_backend() -> str:
    flag = os.environ.get("CATSIM_DISABLE_NUMBA", "").strip().lower()
    if numba is None or flag not in ("", "0", "false", "no"):
        return "numpy"
    return "numba"


# ---------------------------------------------------------------- hashing


def mix64_int(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z = (z + _GOLD) & _MASK64
    z = ((z ^ (z >> 30)) * _M1) & _MASK64
    z = ((z ^ (z >> 27)) * _M2) & _MASK64
    return z ^ (z >> 31)


def mix64_np(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GOLD)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def uniform_np(keys, counters) -> np.ndarray:
    """Uniform doubles in [0, 1) from ``(key, counter)`` pairs (broadcasting)."""
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    z = mix64_np(keys ^ mix64_np(counters))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _apply_gate_np(x: np.ndarray, kind: int, c0: int, c1: int, t: int) -> np.ndarray:
    if kind == 0:
        return x ^ (1 << t)
    cond = (x >> c0) & 1
    if kind == 2:
        cond &= (x >> c1) & 1
    return x ^ (cond << t)


def _slots(row) -> list[int]:
    return [int(b) for b in row[1:] if b >= 0]


# ---------------------------------------------------------------- numpy path


def _np_noiseless(states, table):
    x = np.array(states, dtype=np.int64, copy=True)
    for kind, c0, c1, t in table:
        x = _apply_gate_np(x, kind, c0, c1, t)
    return x


def _np_classical_noisy(states, table, keys, p_x):
    x = np.array(states, dtype=np.int64, copy=True)
    keys = np.asarray(keys, dtype=np.uint64)
    for g, row in enumerate(table):
        x = _apply_gate_np(x, *row)
        if p_x <= 0.0:
            continue
        for s, b in enumerate(_slots(row)):
            u = uniform_np(keys, (4 * g + s) * 2)
            x ^= (u < p_x).astype(np.int64) << b
    return x


def _np_coherent_noiseless(amps, table):
    idx = np.arange(amps.size, dtype=np.int64)
    a = np.array(amps, dtype=np.complex128, copy=True)
    for row in table:
        a = a[_apply_gate_np(idx, *row)]
    return a


def _events_np(table, key, p_x, p_z):
    """Sorted noise events ``(counter, gate, bit, channel)`` for one trajectory."""
    g_idx, s_idx, bits = [], [], []
    for g, row in enumerate(table):
        for s, b in enumerate(_slots(row)):
            g_idx.append(g)
            s_idx.append(s)
            bits.append(b)
    g_idx = np.array(g_idx, dtype=np.int64)
    bits = np.array(bits, dtype=np.int64)
    base = (4 * g_idx + np.array(s_idx, dtype=np.int64)) * 2
    out = []
    for ch, p in ((0, p_x), (1, p_z)):
        if p > 0.0:
            hit = uniform_np(np.uint64(key), base + ch) < p
            out += [(int(c), int(g), int(b), ch) for c, g, b in zip(base[hit] + ch, g_idx[hit], bits[hit])]
    out.sort()
    return out


def _np_error(a, idx, bit, ch):
    if ch == 0:
        return a[idx ^ (1 << bit)]
    return np.where((idx >> bit) & 1, -a, a)


def _np_coherent_noisy(amps, table, key, p_x, p_z):
    idx = np.arange(amps.size, dtype=np.int64)
    a = np.array(amps, dtype=np.complex128, copy=True)
    events = _events_np(table, key, p_x, p_z)
    e = 0
    for g, row in enumerate(table):
        a = a[_apply_gate_np(idx, *row)]
        while e < len(events) and events[e][1] == g:
            a = _np_error(a, idx, events[e][2], events[e][3])
            e += 1
    return a


def prefix_tables(table, dim):
    """Prefix permutations ``sig[g]`` (image after gates ``< g``) and their inverses."""
    G = len(table)
    sig = np.empty((G + 1, dim), dtype=np.int64)
    inv = np.empty((G + 1, dim), dtype=np.int64)
    sig[0] = inv[0] = np.arange(dim)
    for g, row in enumerate(table):
        sig[g + 1] = _apply_gate_np(sig[g], *row)
        inv[g + 1] = inv[g][_apply_gate_np(np.arange(dim), *row)]
    return sig, inv


def _np_window_run(amps, table, sig, inv, key, p_x, p_z):
    idx = np.arange(amps.size, dtype=np.int64)
    a = np.array(amps, dtype=np.complex128, copy=True)
    at = 0
    for _, g, bit, ch in _events_np(table, key, p_x, p_z):
        if at != g + 1:
            a = a[sig[at][inv[g + 1]]]
            at = g + 1
        a = _np_error(a, idx, bit, ch)
    if at != len(table):
        a = a[sig[at][inv[len(table)]]]
    return a


def _sample_index_np(a, u):
    p = a.real * a.real + a.imag * a.imag
    cdf = np.cumsum(p)
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    last = int(np.flatnonzero(p)[-1])
    return min(k, last)


def _np_coherent_shots(amps, table, keys, p_x, p_z, shot_u, sig, inv):
    out = np.empty(len(keys), dtype=np.int64)
    for k in range(len(keys)):
        if sig is None:
            a = _np_coherent_noisy(amps, table, keys[k], p_x, p_z)
        else:
            a = _np_window_run(amps, table, sig, inv, keys[k], p_x, p_z)
        out[k] = _sample_index_np(a, shot_u[k])
    return out


# ---------------------------------------------------------------- numba path

if numba is not None:
    _U_GOLD = np.uint64(_GOLD)
    _U_M1 = np.uint64(_M1)
    _U_M2 = np.uint64(_M2)
    _S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)

    @njit(cache=True, inline="always")
    def _mix64_nb(z):
        z = z + _U_GOLD
        z = (z ^ (z >> _S30)) * _U_M1
        z = (z ^ (z >> _S27)) * _U_M2
        return z ^ (z >> _S31)

    @njit(cache=True, inline="always")
    def _uniform_nb(key, counter):
        z = _mix64_nb(key ^ _mix64_nb(np.uint64(counter)))
        return np.float64(z >> _S11) * _INV53

    @njit(cache=True, inline="always")
    def _gate_nb(x, kind, c0, c1, t):
        if kind == 0:
            return x ^ (np.int64(1) << t)
        cond = (x >> c0) & 1
        if kind == 2:
            cond &= (x >> c1) & 1
        return x ^ (cond << t)

    @njit(cache=True, nogil=True)
    def _nb_noiseless(states, table):
        out = states.copy()
        for m in range(out.size):
            x = out[m]
            for g in range(table.shape[0]):
                x = _gate_nb(x, table[g, 0], table[g, 1], table[g, 2], table[g, 3])
            out[m] = x
        return out

    @njit(cache=True, nogil=True)
    def _nb_classical_noisy(states, table, keys, p_x):
        out = states.copy()
        for m in range(out.size):
            x = out[m]
            key = keys[m]
            for g in range(table.shape[0]):
                x = _gate_nb(x, table[g, 0], table[g, 1], table[g, 2], table[g, 3])
                if p_x > 0.0:
                    s = 0
                    for q in range(1, 4):
                        b = table[g, q]
                        if b >= 0:
                            if _uniform_nb(key, (4 * g + s) * 2) < p_x:
                                x ^= np.int64(1) << b
                            s += 1
            out[m] = x
        return out

    @njit(cache=True, inline="always")
    def _swap_gate_nb(a, kind, c0, c1, t):
        mt = np.int64(1) << t
        for y in range(a.size):
            if y & mt:
                continue
            if kind >= 1 and not (y >> c0) & 1:
                continue
            if kind == 2 and not (y >> c1) & 1:
                continue
            z = y | mt
            tmp = a[y]
            a[y] = a[z]
            a[z] = tmp

    @njit(cache=True, inline="always")
    def _error_nb(a, bit, ch):
        m = np.int64(1) << bit
        if ch == 0:
            for y in range(a.size):
                if not y & m:
                    tmp = a[y]
                    a[y] = a[y | m]
                    a[y | m] = tmp
        else:
            for y in range(a.size):
                if y & m:
                    a[y] = -a[y]

    @njit(cache=True, nogil=True)
    def _nb_coherent_noiseless(amps, table):
        a = amps.copy()
        for g in range(table.shape[0]):
            _swap_gate_nb(a, table[g, 0], table[g, 1], table[g, 2], table[g, 3])
        return a

    @njit(cache=True, nogil=True)
    def _nb_coherent_noisy(amps, table, key, p_x, p_z):
        a = amps.copy()
        for g in range(table.shape[0]):
            _swap_gate_nb(a, table[g, 0], table[g, 1], table[g, 2], table[g, 3])
            s = 0
            for q in range(1, 4):
                b = table[g, q]
                if b < 0:
                    continue
                base = (4 * g + s) * 2
                if p_x > 0.0 and _uniform_nb(key, base) < p_x:
                    _error_nb(a, b, 0)
                if p_z > 0.0 and _uniform_nb(key, base + 1) < p_z:
                    _error_nb(a, b, 1)
                s += 1
        return a

    @njit(cache=True, inline="always")
    def _advance_nb(a, buf, sig, inv, at, to):
        src = sig[at]
        dst = inv[to]
        for y in range(a.size):
            buf[y] = a[src[dst[y]]]
        a[:] = buf

    @njit(cache=True, nogil=True)
    def _nb_window_run(amps, table, sig, inv, key, p_x, p_z):
        a = amps.copy()
        buf = np.empty_like(a)
        at = 0
        G = table.shape[0]
        for g in range(G):
            s = 0
            for q in range(1, 4):
                b = table[g, q]
                if b < 0:
                    continue
                base = (4 * g + s) * 2
                hit_x = p_x > 0.0 and _uniform_nb(key, base) < p_x
                hit_z = p_z > 0.0 and _uniform_nb(key, base + 1) < p_z
                if hit_x or hit_z:
                    if at != g + 1:
                        _advance_nb(a, buf, sig, inv, at, g + 1)
                        at = g + 1
                    if hit_x:
                        _error_nb(a, b, 0)
                    if hit_z:
                        _error_nb(a, b, 1)
                s += 1
        if at != G:
            _advance_nb(a, buf, sig, inv, at, G)
        return a

    @njit(cache=True, inline="always")
    def _sample_index_nb(a, u):
        cdf = np.empty(a.size)
        c = 0.0
        last = 0
        for y in range(a.size):
            p = a[y].real * a[y].real + a[y].imag * a[y].imag
            if p > 0.0:
                last = y
            c += p
            cdf[y] = c
        k = np.searchsorted(cdf, u * cdf[-1], side="right")
        return min(k, last)

    @njit(cache=True, nogil=True)
    def _nb_coherent_shots_window(amps, table, keys, p_x, p_z, shot_u, sig, inv):
        out = np.empty(keys.size, dtype=np.int64)
        for k in range(keys.size):
            a = _nb_window_run(amps, table, sig, inv, keys[k], p_x, p_z)
            out[k] = _sample_index_nb(a, shot_u[k])
        return out

    @njit(cache=True, nogil=True)
    def _nb_coherent_shots_gatewise(amps, table, keys, p_x, p_z, shot_u):
        out = np.empty(keys.size, dtype=np.int64)
        for k in range(keys.size):
            a = _nb_coherent_noisy(amps, table, keys[k], p_x, p_z)
            out[k] = _sample_index_nb(a, shot_u[k])
        return out

    @njit(cache=True, nogil=True)
    def _nb_uniform_many(keys, counter):
        out = np.empty(keys.size)
        for k in range(keys.size):
            out[k] = _uniform_nb(keys[k], counter)
        return out


# ---------------------------------------------------------------- dispatch


def _use_numba(backend: str | None) -> bool:
    return (backend or active_backend()) == "numba"


def apply_gates_noiseless(states, table, backend=None) -> np.ndarray:
    states = np.ascontiguousarray(states, dtype=np.int64)
    if _use_numba(backend):
        return _nb_noiseless(states, table)
    return _np_noiseless(states, table)


def classical_noisy(states, table, keys, p_x, backend=None) -> np.ndarray:
    states = np.ascontiguousarray(states, dtype=np.int64)
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    if _use_numba(backend):
        return _nb_classical_noisy(states, table, keys, float(p_x))
    return _np_classical_noisy(states, table, keys, float(p_x))


def coherent_noiseless(amps, table, backend=None) -> np.ndarray:
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    if _use_numba(backend):
        return _nb_coherent_noiseless(amps, table)
    return _np_coherent_noiseless(amps, table)


def coherent_noisy(amps, table, key, p_x, p_z, backend=None) -> np.ndarray:
    """One gate-by-gate noisy trajectory; returns the final amplitudes."""
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    if _use_numba(backend):
        return _nb_coherent_noisy(amps, table, np.uint64(key), float(p_x), float(p_z))
    return _np_coherent_noisy(amps, table, key, float(p_x), float(p_z))


def coherent_window_run(amps, table, sig, inv, key, p_x, p_z, backend=None) -> np.ndarray:
    """Same trajectory as ``coherent_noisy`` but jumping error-free windows with prefix tables."""
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    if _use_numba(backend):
        return _nb_window_run(amps, table, sig, inv, np.uint64(key), float(p_x), float(p_z))
    return _np_window_run(amps, table, sig, inv, key, float(p_x), float(p_z))


def use_windows(table, dim) -> bool:
    return (len(table) + 1) * dim <= WINDOW_TABLE_BUDGET


def coherent_shots(amps, table, keys, p_x, p_z, shot_u, tables=None, backend=None) -> np.ndarray:
    """One noisy trajectory and one computational-basis shot per key; returns full-width indices.

    ``tables`` is the ``prefix_tables`` pair or ``None`` for gate-by-gate evolution.
    """
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    shot_u = np.ascontiguousarray(shot_u, dtype=np.float64)
    if _use_numba(backend):
        if tables is None:
            return _nb_coherent_shots_gatewise(amps, table, keys, float(p_x), float(p_z), shot_u)
        return _nb_coherent_shots_window(amps, table, keys, float(p_x), float(p_z), shot_u, *tables)
    sig, inv = tables if tables is not None else (None, None)
    return _np_coherent_shots(amps, table, keys, float(p_x), float(p_z), shot_u, sig, inv)


def uniform(keys, counter, backend=None) -> np.ndarray:
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    if _use_numba(backend):
        return _nb_uniform_many(keys, np.uint64(counter))
    return uniform_np(keys, counter)
