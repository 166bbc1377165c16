import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catsim import circuit as C
from catsim import lattice as L
from catsim.errors import ConsistencyError, StructuralError, ValidationError


def oracle_tables(nq, t=1):
    n = 1 << nq
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return L.iterate_cells(i, j, t, n)


@pytest.mark.parametrize("nq", range(1, 7))
def test_step_permutation_equals_oracle(nq):
    pi, pj = C.as_permutation(C.build_step_circuit(nq))
    oi, oj = oracle_tables(nq)
    assert np.array_equal(pi, oi) and np.array_equal(pj, oj)


@pytest.mark.parametrize("nq", range(1, 7))
def test_inverted_step_permutation_equals_inverse(nq):
    pi, pj = C.as_permutation(C.invert(C.build_step_circuit(nq)))
    oi, oj = oracle_tables(nq, -1)
    assert np.array_equal(pi, oi) and np.array_equal(pj, oj)


def test_nq1_enumeration():
    c = C.build_step_circuit(1)
    for i in range(2):
        for j in range(2):
            out = C.apply_classical(c, C.encode((i, j), 1, c.width))
            assert C.decode(out, 1) == L.forward((i, j), 1)
            assert out[2] == 0


def test_width_and_gate_count():
    c = C.build_step_circuit(3)
    assert c.width == 6 + C.N_ANCILLA
    assert len(c) == C.GATES_PER_BIT * 3
    counts = {k: sum(g.kind == k for g in c.gates) for k in (C.NOT, C.CNOT, C.TOFFOLI)}
    assert counts == {C.NOT: 0, C.CNOT: 24, C.TOFFOLI: 12}


@pytest.mark.parametrize("nq", range(1, 13))
def test_gate_count_bound(nq):
    assert len(C.build_step_circuit(nq)) <= C.GATES_PER_BIT * nq


def test_apply_classical_examples():
    c = C.build_step_circuit(3)
    out = C.apply_classical(c, C.encode((1, 2), 3, c.width))
    assert C.decode(out, 3) == (4, 3) and out[6] == 0
    e = C.empty_circuit(3)
    b = np.array([1, 0, 1, 1, 0, 0, 1], dtype=np.uint8)
    assert np.array_equal(C.apply_classical(e, b), b)
    nc = C.Circuit(3, 7, (C.gate(C.NOT, 0),))
    assert C.apply_classical(nc, np.zeros(7, np.uint8)).tolist() == [1, 0, 0, 0, 0, 0, 0]
    with pytest.raises(StructuralError):
        C.apply_classical(c, np.zeros(6, np.uint8))


def test_invert_examples():
    e = C.empty_circuit(2)
    assert C.invert(e).gates == ()
    single = C.Circuit(2, 5, (C.gate(C.CNOT, 0, 3),))
    assert C.invert(single) == single
    c = C.build_step_circuit(3)
    ci = C.invert(c)
    for x in range(64):
        b = C.int_to_bits(x, c.width)
        assert np.array_equal(C.apply_classical(ci, C.apply_classical(c, b)), b)


def test_empty_circuit_is_identity_permutation():
    pi, pj = C.as_permutation(C.empty_circuit(3))
    i, j = oracle_tables(3, 0)
    assert np.array_equal(pi, i) and np.array_equal(pj, j)


@pytest.mark.parametrize("nq", range(1, 5))
def test_ancillas_clean_exhaustive(nq):
    c = C.build_step_circuit(nq)
    x = np.arange(1 << (2 * nq), dtype=np.int64)
    from catsim import _kernels
    assert not np.any(_kernels.apply_gates_noiseless(x, c.table) >> (2 * nq))


@pytest.mark.parametrize("nq", range(5, 11))
def test_ancillas_clean_random(nq, rs):
    c = C.build_step_circuit(nq)
    x = rs.integers(0, 1 << (2 * nq), size=500)
    from catsim import _kernels
    y = _kernels.apply_gates_noiseless(x, c.table)
    assert not np.any(y >> (2 * nq))
    n = 1 << nq
    i2, j2 = L.forward_cells(x & (n - 1), x >> nq, n)
    assert np.array_equal(y, i2 | (j2 << nq))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.data())
def test_reversal_on_arbitrary_bitstrings(nq, data):
    c = C.build_step_circuit(nq)
    bits = data.draw(st.lists(st.integers(0, 1), min_size=c.width, max_size=c.width))
    b = np.array(bits, dtype=np.uint8)
    assert np.array_equal(C.apply_classical(C.invert(c), C.apply_classical(c, b)), b)


def test_as_permutation_detects_dirty_ancilla():
    c = C.Circuit(1, 3, (C.gate(C.CNOT, 0, 2),))
    with pytest.raises(ConsistencyError):
        C.as_permutation(c)


def test_gate_validation():
    with pytest.raises(ValidationError):
        C.gate(C.CNOT, 1, 1)
    with pytest.raises(ValidationError):
        C.Gate(C.TOFFOLI, (0,), 2)
    with pytest.raises(StructuralError):
        C.Circuit(1, 3, (C.gate(C.NOT, 3),))


def test_dump_round_trip():
    c = C.build_step_circuit(3)
    text = c.dump()
    lines = text.splitlines()
    assert len(lines) == len(c)
    assert lines[0] == "CNOT 0 3"
    assert C.parse_dump(text, 3, c.width) == c
