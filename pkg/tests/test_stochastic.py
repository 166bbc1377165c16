import numpy as np
import pytest

from catsim import circuit as C
from catsim import lattice as L
from catsim import stochastic as S
from catsim.coherent import NoiseModel
from catsim.errors import ConsistencyError, ValidationError


def test_sample_initial_examples():
    d = L.delta((1, 2), 3)
    assert all(S.sample_initial(d, seed) == (1, 2) for seed in range(20))
    u = L.uniform(1)
    cells = S.sample_initial_cells(u, 100_000, seed=4)
    freq = np.bincount(cells[:, 0] * 2 + cells[:, 1], minlength=4) / 1e5
    assert np.all(np.abs(freq - 0.25) <= 0.01)
    assert S.sample_initial(u, 99) == S.sample_initial(u, 99)
    assert tuple(S.sample_initial_cells(u, 3, seed=99)[0]) == S.sample_initial(u, 99)
    with pytest.raises(ValidationError):
        S.sample_initial(np.full((2, 2), 0.3), 0)


def test_sampling_is_chunk_independent():
    d = L.gauss(3, 3, 2, 3)
    whole = S.sample_initial_cells(d, 1000, seed=5)
    parts = np.concatenate([S.sample_initial_cells(d, 300, 5, start=0),
                            S.sample_initial_cells(d, 700, 5, start=300)])
    assert np.array_equal(whole, parts)


def test_run_trajectory_examples(backend):
    c = C.build_step_circuit(3)
    assert S.run_trajectory((1, 2), c, 1, backend=backend) == (4, 3)
    ci = C.invert(c)
    for p in [(0, 0), (5, 1), (7, 7)]:
        mid = S.run_trajectory(p, c, 6, backend=backend)
        assert S.run_trajectory(mid, ci, 6, backend=backend) == p


def test_forced_flip_on_single_not(backend):
    # NOT on bit 0 followed by a certain X error on the same bit: net identity
    c = C.Circuit(3, 7, (C.gate(C.NOT, 0),))
    assert S.run_trajectory((1, 2), c, 1, NoiseModel(1.0, 0.0, 0), backend=backend) == (1, 2)
    assert S.run_trajectory((1, 2), c, 1, NoiseModel(0.0, 1.0, 0), backend=backend) == (0, 2)


@pytest.mark.parametrize("nq", range(1, 6))
def test_noiseless_trajectories_match_iterate(nq):
    c = C.build_step_circuit(nq)
    n = 1 << nq
    cells = np.stack(np.meshgrid(np.arange(n), np.arange(n), indexing="ij"), -1).reshape(-1, 2)
    for t in (0, 1, 4, 10):
        out = S.run_trajectories(cells, c, t)
        ii, jj = L.iterate_cells(cells[:, 0], cells[:, 1], t, n)
        assert np.array_equal(out, np.stack([ii, jj], 1))


def test_dirty_ancilla_detected():
    bad = C.Circuit(1, 3, (C.gate(C.CNOT, 0, 2),))
    with pytest.raises(ConsistencyError):
        S.run_trajectory((1, 0), bad)


def test_estimate_density_examples():
    e = S.estimate_density([(4, 3)] * 100, 3)
    assert e.total == 100 and e.counts[4, 3] == 100 and e.counts.sum() == 100
    assert S.estimate_density(np.empty((0, 2)), 3).total == 0
    with pytest.raises(ValidationError):
        S.estimate_density(np.empty((0, 2)), 3).normalize()


def test_estimate_density_concentration():
    d = L.pushforward(L.gauss(5, 5, 2.5, 4), 3)
    m = 10_000
    k = np.count_nonzero(d)
    for seed in range(5):
        e = S.estimate_density(S.sample_initial_cells(d, m, seed), 4)
        tv = 0.5 * np.abs(e.normalize() - d).sum()
        assert tv <= 0.4 * np.sqrt(k / m) * 3


def test_trajectories_reproducible_across_workers():
    c = C.build_step_circuit(4)
    d = L.gauss(3, 3, 2, 4)
    noise = NoiseModel(0.02, 0.0, 11)
    a = S.sample_trajectories(d, c, noise, 10_000, seed=1, steps=3, workers=1)
    b = S.sample_trajectories(d, c, noise, 10_000, seed=1, steps=3, workers=8)
    assert np.array_equal(a, b)


def test_noise_actually_perturbs():
    c = C.build_step_circuit(3)
    pts = np.array([(1, 2)] * 2000)
    out = S.run_trajectories(pts, c, 2, NoiseModel(0.05, 0.0, 3))
    clean = L.iterate((1, 2), 2, 3)
    frac_clean = np.mean(np.all(out == clean, axis=1))
    assert 0.0 < frac_clean < 0.9
