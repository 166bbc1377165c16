"""The numba and numpy paths must agree bit for bit."""
import numpy as np
import pytest

from catsim import _kernels as K
from catsim import rng
from catsim.circuit import build_step_circuit, invert

needs_numba = pytest.mark.skipif(not K.numba_available(), reason="numba not installed")


def splitmix_reference(z):
    # textbook splitmix64 output function on Python ints
    m = (1 << 64) - 1
    z = (z + 0x9E3779B97F4A7C15) & m
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & m
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & m
    return z ^ (z >> 31)


def test_mix64_vectorized_matches_int():
    xs = [0, 1, 2**63, 2**64 - 1, 123456789]
    assert K.mix64_np(np.array(xs, dtype=np.uint64)).tolist() == [splitmix_reference(x) for x in xs]
    assert [K.mix64_int(x) for x in xs] == [splitmix_reference(x) for x in xs]


def test_env_flag_selects_backend(monkeypatch):
    monkeypatch.setenv("CATSIM_DISABLE_NUMBA", "1")
    assert K.active_backend() == "numpy"
    monkeypatch.setenv("CATSIM_DISABLE_NUMBA", "0")
    assert K.active_backend() == ("numba" if K.numba_available() else "numpy")


def test_uniforms_in_range_and_roughly_uniform():
    u = rng.uniforms(5, rng.SHOT, 200_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    hist = np.bincount((u * 10).astype(int), minlength=10) / u.size
    assert np.all(np.abs(hist - 0.1) < 0.003)


def test_derived_keys_differ():
    keys = {rng.derive_key(0, a, b) for a in range(20) for b in range(20)}
    assert len(keys) == 400
    assert rng.derive_key(1, 2) != rng.derive_key(2, 1)


@needs_numba
def test_uniform_backends_agree():
    keys = rng.trajectory_keys(9, 0, 1000)
    assert np.array_equal(K.uniform(keys, 77, "numba"), K.uniform(keys, 77, "numpy"))


@needs_numba
def test_classical_backends_agree(rs):
    c = build_step_circuit(4).repeat(3)
    x = rs.integers(0, 256, size=3000)
    keys = rng.trajectory_keys(3, 0, x.size)
    assert np.array_equal(K.apply_gates_noiseless(x, c.table, "numba"),
                          K.apply_gates_noiseless(x, c.table, "numpy"))
    assert np.array_equal(K.classical_noisy(x, c.table, keys, 0.03, "numba"),
                          K.classical_noisy(x, c.table, keys, 0.03, "numpy"))


def _random_state(rs, dim, data_dim):
    a = np.zeros(dim, complex)
    a[:data_dim] = rs.normal(size=data_dim) + 1j * rs.normal(size=data_dim)
    return a / np.linalg.norm(a)


@needs_numba
def test_coherent_backends_agree(rs):
    c = build_step_circuit(3).repeat(2).then(invert(build_step_circuit(3)))
    a = _random_state(rs, 1 << c.width, 64)
    assert np.array_equal(K.coherent_noiseless(a, c.table, "numba"), K.coherent_noiseless(a, c.table, "numpy"))
    for key in (1, 2, 3):
        assert np.array_equal(K.coherent_noisy(a, c.table, key, 0.05, 0.2, "numba"),
                              K.coherent_noisy(a, c.table, key, 0.05, 0.2, "numpy"))


@pytest.mark.parametrize("p_x, p_z", [(0.0, 0.3), (0.04, 0.0), (0.05, 0.2), (1.0, 1.0)])
def test_window_kernel_equals_gatewise(backend, rs, p_x, p_z):
    c = build_step_circuit(3).repeat(3)
    a = _random_state(rs, 1 << c.width, 64)
    tables = K.prefix_tables(c.table, a.size)
    for key in range(5):
        ref = K.coherent_noisy(a, c.table, key, p_x, p_z, backend)
        win = K.coherent_window_run(a, c.table, *tables, key, p_x, p_z, backend)
        assert np.array_equal(ref, win)


def test_prefix_tables_are_inverse_pairs():
    c = build_step_circuit(2)
    sig, inv = K.prefix_tables(c.table, 1 << c.width)
    for g in range(len(c) + 1):
        assert np.array_equal(sig[g][inv[g]], np.arange(1 << c.width))


def test_shot_kernel_paths_agree(rs):
    c = build_step_circuit(3).repeat(2)
    a = _random_state(rs, 1 << c.width, 64)
    keys = rng.trajectory_keys(4, 0, 300)
    u = rng.uniforms(4, rng.SHOT, 300)
    tables = K.prefix_tables(c.table, a.size)
    results = [K.coherent_shots(a, c.table, keys, 0.02, 0.1, u, t, b)
               for b in [x for x in ("numpy", "numba") if x == "numpy" or K.numba_available()]
               for t in (None, tables)]
    for r in results[1:]:
        assert np.array_equal(r, results[0])
