"""QNode assembly tests: circuit structure, forward outputs, brute force."""
import numpy as np
import pytest

from qseisinv.embedding import EmbeddingSpec, embed_amps
from qseisinv.qnode import (
    BASIC_ENTANGLER,
    NO_ANSATZ,
    QNodeSpec,
    build_ansatz_circuit,
    n_parameters,
    qnode_forward,
    theta_shape,
)
from qseisinv.statevector import Gate, basis_state

from oracles import op_full_matrix


def amp_spec(n_qubits, n_layers=2, axis="x", ansatz=BASIC_ENTANGLER):
    return QNodeSpec(
        n_qubits, EmbeddingSpec("amplitude", n_qubits), n_layers, axis, ansatz
    )


# ---------------------------------------------------------------------------
# circuit structure
# ---------------------------------------------------------------------------

def test_gate_count_four_qubits_two_layers():
    spec = amp_spec(4, n_layers=2)
    ops = build_ansatz_circuit(spec, np.zeros((2, 4)))
    assert len(ops) == 16  # 2 x (4 rotations + 4 ring CNOTs)
    kinds = [op.kind for op in ops]
    assert kinds[:4] == [Gate.RX] * 4
    assert kinds[4:8] == [Gate.CNOT] * 4


def test_ring_wraps_around():
    spec = amp_spec(3, n_layers=1)
    ops = build_ansatz_circuit(spec, np.zeros((1, 3)))
    cnots = [(op.controls[0], op.targets[0]) for op in ops if op.kind == Gate.CNOT]
    assert cnots == [(0, 1), (1, 2), (2, 0)]


def test_two_qubit_ring_is_both_directions():
    spec = amp_spec(2, n_layers=1)
    ops = build_ansatz_circuit(spec, np.zeros((1, 2)))
    cnots = [(op.controls[0], op.targets[0]) for op in ops if op.kind == Gate.CNOT]
    assert cnots == [(0, 1), (1, 0)]


def test_single_qubit_has_no_ring():
    spec = amp_spec(1, n_layers=2)
    ops = build_ansatz_circuit(spec, np.zeros((2, 1)))
    assert all(op.kind == Gate.RX for op in ops)
    assert len(ops) == 2


def test_no_ansatz_empty_circuit():
    spec = amp_spec(3, ansatz=NO_ANSATZ)
    assert build_ansatz_circuit(spec, np.zeros((0, 3))) == []
    assert n_parameters(spec) == 0
    assert theta_shape(spec) == (0, 3)


def test_zero_rotations_fix_all_zero_state():
    spec = amp_spec(3, n_layers=1, axis="y")
    ops = build_ansatz_circuit(spec, np.zeros((1, 3)))
    out = basis_state(3, 0)
    for op in ops:
        from qseisinv.statevector import apply_gate

        out = apply_gate(out, op)
    assert np.allclose(out.amps, basis_state(3, 0).amps, atol=1e-15)


def test_theta_shape_mismatch():
    spec = amp_spec(3, n_layers=2)
    with pytest.raises(ValueError):
        build_ansatz_circuit(spec, np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# forward evaluation
# ---------------------------------------------------------------------------

def test_forward_no_ansatz_basis_input():
    spec = amp_spec(1, ansatz=NO_ANSATZ)
    out = qnode_forward(spec, np.zeros((0, 1)), [1.0, 0.0])
    assert np.allclose(out, [1.0], atol=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.4, np.pi / 3, 2.0])
def test_forward_single_rx_is_cos(t):
    spec = amp_spec(1, n_layers=1)
    out = qnode_forward(spec, np.array([[t]]), [1.0, 0.0])
    assert out[0] == pytest.approx(np.cos(t), abs=1e-12)


def test_forward_outputs_in_range():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        spec = amp_spec(n, n_layers=int(rng.integers(0, 4)), axis="xyz"[rng.integers(3)])
        theta = rng.uniform(0, 2 * np.pi, size=theta_shape(spec))
        x = rng.normal(size=int(rng.integers(2, 2 ** n + 1)))
        out = qnode_forward(spec, theta, x)
        assert np.all(out <= 1.0 + 1e-12)
        assert np.all(out >= -1.0 - 1e-12)


def test_forward_deterministic():
    spec = amp_spec(3)
    theta = np.linspace(0, 1, 6).reshape(2, 3)
    x = np.arange(1.0, 9.0)
    a = qnode_forward(spec, theta, x)
    b = qnode_forward(spec, theta, x)
    assert np.array_equal(a, b)


def test_forward_no_ansatz_ignores_theta_values():
    spec = amp_spec(3, ansatz=NO_ANSATZ)
    x = np.arange(1.0, 9.0)
    ref = qnode_forward(spec, np.zeros((0, 3)), x)
    again = qnode_forward(spec, np.empty((0, 3)), x)
    assert np.array_equal(ref, again)


def test_forward_matches_dense_matrix_simulation():
    # multiply out the full tensor-product operators explicitly
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        spec = amp_spec(n, n_layers=2, axis="xyz"[rng.integers(3)])
        theta = rng.uniform(0, 2 * np.pi, size=(2, n))
        x = rng.normal(size=2 ** n)
        if np.linalg.norm(x) == 0.0:
            continue
        base = embed_amps(spec.embedding, x)
        full = base.copy()
        for op in build_ansatz_circuit(spec, theta):
            full = op_full_matrix(op, n) @ full
        probs = np.abs(full) ** 2
        expected = []
        for w in range(n):
            signs = 1 - 2 * ((np.arange(2 ** n) >> (n - 1 - w)) & 1)
            expected.append(signs @ probs)
        assert np.allclose(qnode_forward(spec, theta, x), expected, atol=1e-10)
