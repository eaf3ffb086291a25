import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trotterqpe.circuit_core import (
    INITIAL_STATE_KINDS,
    GateOp,
    QuantumCircuit,
    basis_state,
    build_initial_state,
    circuit_unitary,
    gate_census,
    haar_su4,
    marginal_probabilities,
    run_circuit,
    sample_measurements,
    u3_matrix,
)
from trotterqpe.errors import InvalidArgumentError, ResourceLimitError

H2 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def dense_gate(op, q):
    """Independent full-matrix construction of a gate on q qubits."""
    eye = np.eye(2)
    if op.arity == 1:
        if op.kind == "H":
            small = H2
        elif op.kind == "X":
            small = np.array([[0, 1], [1, 0]])
        elif op.kind == "RZ":
            small = np.diag([np.exp(-0.5j * op.params[0]), np.exp(0.5j * op.params[0])])
        else:
            small = u3_matrix(*op.params)
        mats = [small if p == op.qubits[0] else eye for p in range(q)]
        out = np.eye(1)
        for m in reversed(mats):
            out = np.kron(out, m)
        return out
    dim = 1 << q
    out = np.zeros((dim, dim), dtype=complex)
    a, b = op.qubits
    for col in range(dim):
        ba, bb = (col >> a) & 1, (col >> b) & 1
        if op.kind == "CX":
            out[col ^ (ba << b), col] = 1
        elif op.kind == "CZ":
            out[col, col] = -1 if ba and bb else 1
        elif op.kind == "CP":
            out[col, col] = np.exp(1j * op.params[0]) if ba and bb else 1
        elif op.kind == "CRZ":
            out[col, col] = np.exp((-0.5j if bb == 0 else 0.5j) * op.params[0]) if ba else 1
        else:
            sub = 2 * ba + bb
            rest = col & ~((1 << a) | (1 << b))
            for row_sub in range(4):
                row = rest | ((row_sub >> 1) << a) | ((row_sub & 1) << b)
                out[row, col] = op.matrix[row_sub, sub]
    return out


def random_op(rng, q):
    kind = str(rng.choice(["H", "X", "RZ", "U3", "CX", "CZ", "CRZ", "CP", "TWO_QUBIT_UNITARY"]))
    if kind in ("H", "X", "RZ", "U3"):
        qubits = (int(rng.integers(q)),)
    else:
        qubits = tuple(int(x) for x in rng.choice(q, 2, replace=False))
    params = {"RZ": 1, "CRZ": 1, "CP": 1, "U3": 3}.get(kind, 0)
    matrix = haar_su4(rng) if kind == "TWO_QUBIT_UNITARY" else None
    return GateOp(kind, qubits, tuple(rng.uniform(-4, 4, params)), matrix)


def test_empty_circuit_leaves_state():
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    np.testing.assert_array_equal(run_circuit(QuantumCircuit(3), psi), psi)


def test_hh_is_identity():
    c = QuantumCircuit(1).h(0).h(0)
    np.testing.assert_allclose(circuit_unitary(c), np.eye(2), atol=1e-12)


def test_ghz_amplitudes():
    psi = run_circuit(build_initial_state("ghz", 3))
    expected = np.zeros(8)
    expected[[0, 7]] = 1 / math.sqrt(2)
    np.testing.assert_allclose(psi, expected, atol=1e-12)


def test_every_gate_matches_dense_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        op = random_op(rng, 4)
        c = QuantumCircuit(4, [op])
        np.testing.assert_allclose(circuit_unitary(c), dense_gate(op, 4), atol=1e-12,
                                   err_msg=op.kind)


def test_hadamard_unitary_and_rz_inverse():
    np.testing.assert_allclose(circuit_unitary(QuantumCircuit(1).h(0)), H2, atol=1e-15)
    c = QuantumCircuit(2).rz(0.7, 1).rz(-0.7, 1)
    np.testing.assert_allclose(circuit_unitary(c), np.eye(4), atol=1e-15)


def test_unitary_guard():
    with pytest.raises(ResourceLimitError):
        circuit_unitary(QuantumCircuit(7))


def test_inverse_circuit():
    rng = np.random.default_rng(2)
    c = QuantumCircuit(3, [random_op(rng, 3) for _ in range(40)])
    u = circuit_unitary(c)
    np.testing.assert_allclose(circuit_unitary(c.inverse()), u.conj().T, atol=1e-12)
    defect = np.linalg.norm(u.conj().T @ u - np.eye(8))
    assert defect <= 1e-8


def test_norm_preserved_over_long_random_circuit():
    rng = np.random.default_rng(3)
    c = QuantumCircuit(5, [random_op(rng, 5) for _ in range(10_000)])
    psi = run_circuit(c)
    assert abs(np.linalg.norm(psi) - 1) <= 1e-9


def test_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        run_circuit(QuantumCircuit(2), np.ones(8) / math.sqrt(8))


def test_gate_validation():
    with pytest.raises(InvalidArgumentError):
        GateOp("CX", (1, 1))
    with pytest.raises(InvalidArgumentError):
        GateOp("RZ", (0,), (float("inf"),))
    with pytest.raises(InvalidArgumentError):
        QuantumCircuit(2).cx(0, 2)


def test_census():
    assert gate_census(QuantumCircuit(2)).as_dict() == {
        "one_qubit_count": 0, "two_qubit_count": 0, "total": 0}
    ghz = gate_census(build_initial_state("ghz", 3))
    assert (ghz.one_qubit_count, ghz.two_qubit_count, ghz.total) == (1, 2, 3)
    rng = np.random.default_rng(4)
    c1 = QuantumCircuit(3, [random_op(rng, 3) for _ in range(30)])
    c2 = QuantumCircuit(3, [random_op(rng, 3) for _ in range(17)])
    joined = QuantumCircuit(3, c1.ops).compose(c2)
    assert gate_census(joined) == gate_census(c1) + gate_census(c2)


def test_text_round_trip():
    rng = np.random.default_rng(5)
    c = QuantumCircuit(3, [random_op(rng, 3) for _ in range(50)])
    text = c.to_text()
    assert text.splitlines()[0].split(" ")[0] in {"H", "X", "RZ", "U3", "CX", "CZ", "CRZ", "CP",
                                                  "TWO_QUBIT_UNITARY"}
    back = QuantumCircuit.from_text(3, text)
    np.testing.assert_array_equal(circuit_unitary(back), circuit_unitary(c))
    assert QuantumCircuit(2).rz(0.5, 1).cx(0, 1).to_text() == "RZ 1;0.5\nCX 0,1\n"


def test_sampling_basis_state():
    hist = sample_measurements(basis_state(3, 0b101), [0, 1, 2], 500, seed=1)
    # qubit 0 is listed first, so it is the leftmost character
    assert hist.counts == {"101": 500}
    hist = sample_measurements(basis_state(3, 0b001), [2, 1, 0], 10, seed=1)
    assert hist.counts == {"001": 10}
    hist = sample_measurements(basis_state(3, 0b001), [0, 2], 10, seed=1)
    assert hist.counts == {"10": 10}


def test_sampling_uniform_qubit_within_three_sigma():
    psi = run_circuit(QuantumCircuit(1).h(0))
    hist = sample_measurements(psi, [0], 10_000, seed=7)
    assert hist.total_shots == 10_000 and sum(hist.counts.values()) == 10_000
    assert abs(hist.counts["0"] - 5000) <= 150


def test_sampling_deterministic():
    psi = run_circuit(build_initial_state("random_u3", 3, seed=3))
    a = sample_measurements(psi, [0, 2], 1000, seed=42)
    b = sample_measurements(psi, [0, 2], 1000, seed=42)
    assert a == b
    with pytest.raises(InvalidArgumentError):
        sample_measurements(psi, [], 10, seed=1)


def test_sampling_total_variation():
    rng = np.random.default_rng(9)
    for trial in range(3):
        psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        psi /= np.linalg.norm(psi)
        exact = np.abs(psi) ** 2
        hist = sample_measurements(psi, [2, 1, 0], 100_000, seed=trial)
        emp = np.zeros(8)
        for bits, c in hist.counts.items():
            emp[int(bits, 2)] = c / hist.total_shots
        assert 0.5 * np.abs(emp - exact).sum() <= 0.01


def test_marginal_oracle():
    rng = np.random.default_rng(10)
    psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi /= np.linalg.norm(psi)
    qubits = [3, 0]
    brute = np.zeros(4)
    for i, a in enumerate(psi):
        brute[2 * ((i >> 3) & 1) + (i & 1)] += abs(a) ** 2
    np.testing.assert_allclose(marginal_probabilities(psi, qubits), brute, atol=1e-14)


def test_initial_state_examples():
    assert len(build_initial_state("all_zero", 3)) == 0
    np.testing.assert_array_equal(run_circuit(build_initial_state("all_zero", 3)), basis_state(3, 0))
    ghz = run_circuit(build_initial_state("ghz", 3))
    assert abs(abs(ghz[0]) ** 2 - 0.5) < 1e-12 and abs(abs(ghz[7]) ** 2 - 0.5) < 1e-12
    stag = run_circuit(build_initial_state("staggered_x", 4))
    np.testing.assert_allclose(stag, basis_state(4, 0b1010), atol=0)


def test_clique_graph_state():
    n = 4
    psi = run_circuit(build_initial_state("clique_graph", n))
    for i in range(1 << n):
        edges = sum(((i >> a) & 1) * ((i >> b) & 1) for a in range(n) for b in range(a + 1, n))
        assert abs(psi[i] - (-1) ** edges / 4) < 1e-12


def test_quantum_volume_layout():
    c = build_initial_state("quantum_volume_su4", 5, seed=3)
    assert len(c) == 5 * 2 and all(op.kind == "TWO_QUBIT_UNITARY" for op in c.ops)
    for layer in range(5):
        used = [q for op in c.ops[2 * layer: 2 * layer + 2] for q in op.qubits]
        assert len(set(used)) == 4
    again = build_initial_state("quantum_volume_su4", 5, seed=3)
    assert c.to_text() == again.to_text()
    assert c.to_text() != build_initial_state("quantum_volume_su4", 5, seed=4).to_text()


def test_haar_su4_unitary_det_one():
    rng = np.random.default_rng(11)
    for _ in range(50):
        u = haar_su4(rng)
        assert np.linalg.norm(u.conj().T @ u - np.eye(4)) <= 1e-10
        assert abs(np.linalg.det(u) - 1) <= 1e-10


def test_random_u3_angle_ranges():
    c = build_initial_state("random_u3", 6, seed=2)
    for op in c.ops:
        theta, phi, lam = op.params
        assert 0 <= theta <= math.pi and 0 <= phi < 2 * math.pi and 0 <= lam < 2 * math.pi


@pytest.mark.parametrize("kind", INITIAL_STATE_KINDS)
def test_initial_states_normalized(kind):
    psi = run_circuit(build_initial_state(kind, 5, seed=1))
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_unknown_kind():
    with pytest.raises(InvalidArgumentError):
        build_initial_state("w_state", 3)


@given(seed=st.integers(0, 2**32), q=st.integers(2, 5))
@settings(max_examples=30, deadline=None)
def test_norm_preservation_property(seed, q):
    rng = np.random.default_rng(seed)
    c = QuantumCircuit(q, [random_op(rng, q) for _ in range(60)])
    psi = run_circuit(c)
    assert abs(np.linalg.norm(psi) - 1) <= 1e-9
