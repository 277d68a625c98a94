"""Quantum node: feature map + basic entangler ansatz + Z measurements.

The ansatz is the closed-chain entangler: per layer, one parameterized
rotation on every wire followed by a CNOT ring 0->1, 1->2, ...,
(n-1)->0 (two CNOTs 0->1, 1->0 for n = 2; none for n = 1). Outputs are
the Pauli-Z expectation values of every wire.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import AXIS_GATES, EmbeddingSpec, embed_amps
from .statevector import CircuitSpec, all_z_expectations, apply_op_amps, cnot

BASIC_ENTANGLER = "basic-entangler"
NO_ANSATZ = "none"


@dataclass(frozen=True)
class QNodeSpec:
    """Structure of one quantum layer."""

    n_qubits: int
    embedding: EmbeddingSpec
    n_layers: int = 2
    rotation_axis: str = "x"
    ansatz: str = BASIC_ENTANGLER

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.ansatz not in (BASIC_ENTANGLER, NO_ANSATZ):
            raise ValueError(f"unknown ansatz {self.ansatz!r}")
        if self.rotation_axis not in AXIS_GATES:
            raise ValueError(f"unknown rotation axis {self.rotation_axis!r}")
        if self.ansatz == BASIC_ENTANGLER and self.n_layers < 0:
            raise ValueError("n_layers must be >= 0")
        if self.embedding.n_qubits != self.n_qubits:
            raise ValueError("embedding and node qubit counts differ")


def theta_shape(spec: QNodeSpec) -> tuple[int, int]:
    """Shape of the trainable parameter tensor (0 layers when no ansatz)."""
    if spec.ansatz == NO_ANSATZ:
        return (0, spec.n_qubits)
    return (spec.n_layers, spec.n_qubits)


def n_parameters(spec: QNodeSpec) -> int:
    rows, cols = theta_shape(spec)
    return rows * cols


def _check_theta(spec: QNodeSpec, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    expected = theta_shape(spec)
    if spec.ansatz == NO_ANSATZ:
        if theta.size != 0:
            raise ValueError("no-ansatz node takes no parameters")
        return theta.reshape(expected)
    if theta.shape != expected:
        raise ValueError(f"theta shape {theta.shape} != expected {expected}")
    return theta


def build_ansatz_circuit(spec: QNodeSpec, theta) -> CircuitSpec:
    """Gate list of the basic entangler (empty for the no-ansatz mode)."""
    theta = _check_theta(spec, theta)
    if spec.ansatz == NO_ANSATZ:
        return []
    gate = AXIS_GATES[spec.rotation_axis]
    n = spec.n_qubits
    ops = []
    for layer in range(spec.n_layers):
        for q in range(n):
            ops.append(gate(float(theta[layer, q]), q))
        if n >= 2:
            for q in range(n):
                ops.append(cnot(q, (q + 1) % n))
    return ops


def forward_amps(spec: QNodeSpec, theta, base_amps: np.ndarray) -> np.ndarray:
    """Final statevector amplitudes given pre-embedded input amplitudes."""
    amps = base_amps
    for op in build_ansatz_circuit(spec, theta):
        amps = apply_op_amps(amps, spec.n_qubits, op)
    return amps


def qnode_forward(spec: QNodeSpec, theta, x) -> np.ndarray:
    """[<Z_0>, ..., <Z_{n-1}>] of the state embedding(x) then ansatz(theta)."""
    base = embed_amps(spec.embedding, x)
    return all_z_expectations(forward_amps(spec, theta, base), spec.n_qubits)
