"""Dense statevector simulation of small quantum registers.

Convention: wire 0 is the most significant bit of the amplitude index.
For two qubits the basis order is |00>, |01>, |10>, |11>, so applying X
to wire 0 of |00> produces the amplitude vector (0, 0, 1, 0).

Gates are applied by vectorized amplitude-pair updates along the target
wire's axis (O(2^n) work per single-qubit gate); the full 2^n x 2^n
operator is never materialized.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

NORM_ATOL = 1e-10

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


class Gate(Enum):
    """Supported gate kinds."""

    RX = "rx"
    RY = "ry"
    RZ = "rz"
    ROT = "rot"
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    CNOT = "cnot"
    CRX = "crx"
    CRY = "cry"
    CRZ = "crz"


_N_PARAMS = {
    Gate.RX: 1, Gate.RY: 1, Gate.RZ: 1, Gate.ROT: 3,
    Gate.X: 0, Gate.Y: 0, Gate.Z: 0, Gate.H: 0,
    Gate.CNOT: 0, Gate.CRX: 1, Gate.CRY: 1, Gate.CRZ: 1,
}

ROTATION_GATES = (Gate.RX, Gate.RY, Gate.RZ)

_CONTROLLED_KINDS = {
    Gate.CNOT: Gate.X, Gate.CRX: Gate.RX, Gate.CRY: Gate.RY, Gate.CRZ: Gate.RZ,
}


@dataclass(frozen=True)
class GateOp:
    """One unitary operation: kind, parameters, target and control wires.

    ``control_state`` is the value every control wire must hold for the
    target matrix to act (1 = condition on |1>, the default; 0 = |0>).
    """

    kind: Gate
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    controls: tuple[int, ...] = ()
    control_state: int = 1

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if len(self.targets) != 1:
            raise ValueError(f"{self.kind.value} expects exactly one target wire")
        if len(self.params) != _N_PARAMS[self.kind]:
            raise ValueError(
                f"{self.kind.value} expects {_N_PARAMS[self.kind]} parameter(s), "
                f"got {len(self.params)}"
            )
        if self.kind in _CONTROLLED_KINDS and not self.controls:
            raise ValueError(f"{self.kind.value} requires a control wire")
        if set(self.targets) & set(self.controls):
            raise ValueError("target and control wires must be disjoint")
        if self.control_state not in (0, 1):
            raise ValueError("control_state must be 0 or 1")


CircuitSpec = list[GateOp]  # ordered gate sequence


def rx(theta: float, wire: int) -> GateOp:
    return GateOp(Gate.RX, (wire,), (theta,))


def ry(theta: float, wire: int) -> GateOp:
    return GateOp(Gate.RY, (wire,), (theta,))


def rz(theta: float, wire: int) -> GateOp:
    return GateOp(Gate.RZ, (wire,), (theta,))


def rot(theta: float, phi: float, lam: float, wire: int) -> GateOp:
    return GateOp(Gate.ROT, (wire,), (theta, phi, lam))


def pauli_x(wire: int) -> GateOp:
    return GateOp(Gate.X, (wire,))


def pauli_y(wire: int) -> GateOp:
    return GateOp(Gate.Y, (wire,))


def pauli_z(wire: int) -> GateOp:
    return GateOp(Gate.Z, (wire,))


def hadamard(wire: int) -> GateOp:
    return GateOp(Gate.H, (wire,))


def cnot(control: int, target: int) -> GateOp:
    return GateOp(Gate.CNOT, (target,), controls=(control,))


def crx(theta: float, control: int, target: int) -> GateOp:
    return GateOp(Gate.CRX, (target,), (theta,), controls=(control,))


def cry(theta: float, control: int, target: int) -> GateOp:
    return GateOp(Gate.CRY, (target,), (theta,), controls=(control,))


def crz(theta: float, control: int, target: int) -> GateOp:
    return GateOp(Gate.CRZ, (target,), (theta,), controls=(control,))


@dataclass(frozen=True)
class StateVector:
    """Immutable n-qubit state: 2^n complex amplitudes with unit norm."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (2 ** self.n_qubits,):
            raise ValueError(
                f"expected {2 ** self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_ATOL}")
        object.__setattr__(self, "amps", amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def basis_state(n_qubits: int, index: int) -> StateVector:
    """Computational basis state |index> of an n-qubit register."""
    dim = 2 ** n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubit(s)")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def bloch_state(theta: float, phi: float) -> StateVector:
    """Single-qubit state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    amps = np.array(
        [np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)],
        dtype=np.complex128,
    )
    return StateVector(1, amps)


def _rotation_matrix(kind: Gate, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if kind is Gate.RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind is Gate.RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array(
        [[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]],
        dtype=np.complex128,
    )


def gate_matrix(op: GateOp) -> np.ndarray:
    """Defining unitary of the operation: 2x2, or 4x4 for CNOT.

    Controls other than CNOT's built-in one are ignored here; the CNOT
    matrix is given in the (control = first/most significant wire,
    target = second wire) layout.
    """
    k = op.kind
    if k in ROTATION_GATES:
        return _rotation_matrix(k, op.params[0])
    if k is Gate.ROT:
        theta, phi, lam = op.params
        c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
        return np.array(
            [
                [c, -np.exp(1j * lam) * s],
                [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
            ],
            dtype=np.complex128,
        )
    if k is Gate.X:
        return np.array([[0, 1], [1, 0]], dtype=np.complex128)
    if k is Gate.Y:
        return np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    if k is Gate.Z:
        return np.array([[1, 0], [0, -1]], dtype=np.complex128)
    if k is Gate.H:
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2
    if k is Gate.CNOT:
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
            dtype=np.complex128,
        )
    # CRX / CRY / CRZ: the rotation acting on the target
    return _rotation_matrix(_CONTROLLED_KINDS[k], op.params[0])


def target_matrix(op: GateOp) -> np.ndarray:
    """2x2 matrix applied to the target wire (controls handled separately)."""
    if op.kind in _CONTROLLED_KINDS:
        base = _CONTROLLED_KINDS[op.kind]
        if base is Gate.X:
            return gate_matrix(GateOp(Gate.X, (0,)))
        return _rotation_matrix(base, op.params[0])
    return gate_matrix(op)


def apply_single_qubit_matrix(
    amps: np.ndarray,
    n_qubits: int,
    matrix: np.ndarray,
    wire: int,
    controls: tuple[int, ...] = (),
    control_state: int = 1,
) -> np.ndarray:
    """Apply a 2x2 matrix to one wire of a raw amplitude array.

    Accepts a single state (shape (2^n,)) or a batch (shape (B, 2^n)).
    The matrix need not be unitary; gradient engines use this entry
    point to apply gate derivatives, so no normalization is enforced.
    """
    arr = np.asarray(amps)
    batched = arr.ndim == 2
    out = np.array(arr, dtype=np.complex128)
    shape = ((arr.shape[0],) if batched else ()) + (2,) * n_qubits
    view = out.reshape(shape)
    offset = 1 if batched else 0

    slicer = [slice(None)] * view.ndim
    for c in controls:
        slicer[offset + c] = control_state
    sub = view[tuple(slicer)]
    axis = offset + wire - sum(1 for c in controls if c < wire)
    sub = np.moveaxis(sub, axis, 0)

    a0 = sub[0].copy()
    a1 = sub[1]
    sub[0] = matrix[0, 0] * a0 + matrix[0, 1] * a1
    sub[1] = matrix[1, 0] * a0 + matrix[1, 1] * a1
    return out


def apply_op_amps(amps: np.ndarray, n_qubits: int, op: GateOp) -> np.ndarray:
    """Apply one GateOp to a raw amplitude array (no norm validation)."""
    return apply_single_qubit_matrix(
        amps, n_qubits, target_matrix(op), op.targets[0], op.controls, op.control_state
    )


def _validate_wires(op: GateOp, n_qubits: int) -> None:
    for w in op.targets + op.controls:
        if not 0 <= w < n_qubits:
            raise ValueError(f"wire {w} out of range for {n_qubits} qubit(s)")


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Apply one gate; equivalent to the full tensor-product operator."""
    _validate_wires(op, state.n_qubits)
    return StateVector(state.n_qubits, apply_op_amps(state.amps, state.n_qubits, op))


def apply_circuit(state: StateVector, ops) -> StateVector:
    for op in ops:
        state = apply_gate(state, op)
    return state


@lru_cache(maxsize=None)
def z_sign_matrix(n_qubits: int) -> np.ndarray:
    """Row w holds the Pauli-Z eigenvalue (+1/-1) of each basis index on wire w."""
    idx = np.arange(2 ** n_qubits)
    bits = (idx[None, :] >> (n_qubits - 1 - np.arange(n_qubits)[:, None])) & 1
    return (1.0 - 2.0 * bits).astype(np.float64)


def expectation_z(state: StateVector, wire: int) -> float:
    """<psi| Z_wire |psi> = sum over basis indices of (+-1) |amp|^2."""
    if not 0 <= wire < state.n_qubits:
        raise ValueError(f"wire {wire} out of range for {state.n_qubits} qubit(s)")
    return float(z_sign_matrix(state.n_qubits)[wire] @ state.probabilities())


def all_z_expectations(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    """[<Z_0>, ..., <Z_{n-1}>] of a raw amplitude array."""
    probs = np.abs(np.asarray(amps)) ** 2
    return z_sign_matrix(n_qubits) @ probs
