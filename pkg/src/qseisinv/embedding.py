"""Classical-to-quantum data encodings.

Two feature maps are provided: angle embedding (one rotation per wire)
and amplitude embedding (data written into the state's amplitudes).
Amplitude embedding has a fast path that assigns the normalized vector
directly, and an equivalent explicit circuit of uniformly controlled RY
rotations decomposed into RY + CNOT cascades; the test suite holds the
two paths to agree. Real inputs only, so no phase-correction stage is
emitted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import (
    CircuitSpec,
    GateOp,
    StateVector,
    apply_op_amps,
    basis_state,
    cnot,
    rx,
    ry,
    rz,
)

AXIS_GATES = {"x": rx, "y": ry, "z": rz}

ANGLE = "angle"
AMPLITUDE = "amplitude"


class EmbeddingError(ValueError):
    """Input cannot be encoded (empty, all-zero, or too large)."""


@dataclass(frozen=True)
class EmbeddingSpec:
    """How classical data enters the register.

    ``rotation_axis`` only matters for angle embedding. The caller is
    responsible for any angle preprocessing (e.g. scaling to [0, pi]).
    """

    kind: str
    n_qubits: int
    rotation_axis: str = "x"

    def __post_init__(self):
        if self.kind not in (ANGLE, AMPLITUDE):
            raise ValueError(f"unknown embedding kind {self.kind!r}")
        if self.rotation_axis not in AXIS_GATES:
            raise ValueError(f"unknown rotation axis {self.rotation_axis!r}")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")


@dataclass(frozen=True)
class PaddedVector:
    values: np.ndarray
    norm: float
    n_qubits: int


def pad_and_normalize(x) -> PaddedVector:
    """Zero-pad to the next power of two and scale to unit norm.

    Returns the unit vector, the norm of the padded input (equal to
    ||x|| since the padding is zero), and the implied qubit count.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmbeddingError("cannot embed an empty vector")
    n_qubits = max(1, (x.size - 1).bit_length())
    padded = np.zeros(2 ** n_qubits)
    padded[: x.size] = x
    norm = float(np.linalg.norm(padded))
    if norm == 0.0:
        raise EmbeddingError("cannot embed an all-zero vector (undefined direction)")
    return PaddedVector(padded / norm, norm, n_qubits)


def angle_embed(x, spec: EmbeddingSpec) -> StateVector:
    """Rotate wire i of |0...0> by x_i about the configured axis."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size > spec.n_qubits:
        raise EmbeddingError(
            f"{x.size} feature(s) exceed {spec.n_qubits} qubit(s) for angle embedding"
        )
    state = basis_state(spec.n_qubits, 0)
    amps = state.amps
    gate = AXIS_GATES[spec.rotation_axis]
    for wire, angle in enumerate(x):
        amps = apply_op_amps(amps, spec.n_qubits, gate(float(angle), wire))
    return StateVector(spec.n_qubits, amps)


def _padded_for(x, n_qubits: int) -> np.ndarray:
    p = pad_and_normalize(x)
    if p.n_qubits > n_qubits:
        raise EmbeddingError(
            f"input of length {np.asarray(x).size} needs {p.n_qubits} qubit(s), "
            f"got {n_qubits}"
        )
    if p.n_qubits == n_qubits:
        return p.values
    out = np.zeros(2 ** n_qubits)
    out[: p.values.size] = p.values
    return out


def amplitude_embed(x, n_qubits: int) -> StateVector:
    """State whose amplitudes are the normalized zero-padded input."""
    return StateVector(n_qubits, _padded_for(x, n_qubits).astype(np.complex128))


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _multiplexed_ry(angles: np.ndarray, target: int, controls: tuple[int, ...]):
    """RY(angles[j]) on `target` conditioned on control pattern j.

    Decomposed into single RY rotations interleaved with CNOTs in Gray
    code order; pattern bit b (weight 2^b) corresponds to control wire
    controls[k－1－b] so that wire 0 is the pattern's most significant bit.
    """
    k = len(controls)
    if k == 0:
        return [ry(float(angles[0]), target)]
    size = 1 << k
    m = np.empty((size, size))
    for i in range(size):
        g = _gray(i)
        for j in range(size):
            m[i, j] = (-1.0) ** int(bin(j & g).count("1")) / size
    thetas = m @ np.asarray(angles, dtype=np.float64)
    ops = []
    for i in range(size):
        ops.append(ry(float(thetas[i]), target))
        step = i + 1
        b = min((step & -step).bit_length() - 1, k - 1)
        ops.append(cnot(controls[k - 1 - b], target))
    return ops


def amplitude_embedding_angles(x, n_qubits: int) -> list[np.ndarray]:
    """Uniformly controlled RY angles per wire, from the amplitude recursion.

    Interior levels split probability mass between subtrees (angles from
    subtree norms); the leaf level uses the signed amplitudes, so real
    vectors with negative entries are reproduced exactly. Zero-mass
    branches get angle 0.
    """
    current = _padded_for(x, n_qubits)
    per_level: list[np.ndarray] = []
    for _ in range(n_qubits):
        pairs = current.reshape(-1, 2)
        norms = np.sqrt((pairs ** 2).sum(axis=1))
        angles = np.where(norms > 0.0, 2.0 * np.arctan2(pairs[:, 1], pairs[:, 0]), 0.0)
        per_level.append(angles)
        current = norms
    per_level.reverse()  # index = target wire
    return per_level


def amplitude_embedding_circuit(x, n_qubits: int) -> CircuitSpec:
    """Explicit state-preparation circuit matching amplitude_embed."""
    ops: list[GateOp] = []
    for wire, angles in enumerate(amplitude_embedding_angles(x, n_qubits)):
        ops.extend(_multiplexed_ry(angles, wire, tuple(range(wire))))
    return ops


def embed_amps(spec: EmbeddingSpec, x) -> np.ndarray:
    """Raw amplitudes of the embedded state (fast path)."""
    if spec.kind == AMPLITUDE:
        return _padded_for(x, spec.n_qubits).astype(np.complex128)
    return angle_embed(x, spec).amps


def embed_state(spec: EmbeddingSpec, x) -> StateVector:
    return StateVector(spec.n_qubits, embed_amps(spec, x))
