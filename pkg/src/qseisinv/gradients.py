"""Gradients of quantum-node outputs with respect to ansatz parameters.

Four interchangeable engines:

* parameter shift  - exact, evaluates the node at theta_j +- pi/2
                     (valid here because every ansatz generator is a
                     Pauli rotation), 2 evaluations per parameter;
* adjoint          - exact, one forward state plus one reverse sweep per
                     observable applying conjugate-transposed gates, no
                     extra full circuit evaluations;
* finite difference- central differences with step delta;
* SPSA             - stochastic estimate of a *scalar loss* gradient from
                     a single +-1 perturbation of all parameters at once,
                     two loss evaluations per sample regardless of the
                     parameter count.

Each result carries its circuit-evaluation accounting so callers can
compare the methods' cost like-for-like.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import embed_amps
from .qnode import QNodeSpec, build_ansatz_circuit, forward_amps, n_parameters
from .statevector import (
    ROTATION_GATES,
    Gate,
    GateOp,
    all_z_expectations,
    apply_single_qubit_matrix,
    gate_matrix,
    target_matrix,
    z_sign_matrix,
)

PARAMETER_SHIFT = "parameter-shift"
ADJOINT = "adjoint"
FINITE_DIFFERENCE = "finite-difference"
SPSA = "spsa"

GRAD_METHODS = (PARAMETER_SHIFT, ADJOINT, FINITE_DIFFERENCE, SPSA)
JACOBIAN_METHODS = (PARAMETER_SHIFT, ADJOINT, FINITE_DIFFERENCE)

_PAULI = {
    Gate.RX: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    Gate.RY: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    Gate.RZ: np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class GradConfig:
    """Which engine to use and its knobs."""

    method: str = ADJOINT
    fd_delta: float = 1e-4
    spsa_epsilon: float = 0.01
    spsa_num_samples: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.method not in GRAD_METHODS:
            raise ValueError(f"unknown gradient method {self.method!r}")
        if self.fd_delta <= 0.0:
            raise ValueError("fd_delta must be positive")
        if self.spsa_epsilon <= 0.0:
            raise ValueError("spsa_epsilon must be positive")
        if self.spsa_num_samples < 1:
            raise ValueError("spsa_num_samples must be >= 1")


@dataclass
class QuantumJacobian:
    """d<Z_k>/d theta_j plus the evaluation bookkeeping that produced it.

    ``n_evaluations`` counts full circuit evaluations; ``n_sweeps``
    counts adjoint reverse sweeps (one per observable), which cost about
    one evaluation each and are reported separately so that adjoint's
    "no extra full evaluations" property stays visible.
    """

    values: np.ndarray
    n_evaluations: int
    n_sweeps: int = 0


@dataclass
class LossGradient:
    values: np.ndarray
    n_evaluations: int


def _base_amps(spec: QNodeSpec, x, base):
    if base is None:
        return embed_amps(spec.embedding, x)
    return np.asarray(base, dtype=np.complex128)


def _check_rotations_only(ops) -> None:
    for op in ops:
        if op.kind not in ROTATION_GATES and op.kind is not Gate.CNOT:
            raise ValueError(
                f"gradient engines support rotation/CNOT ansatz gates, got {op.kind}"
            )


def _shifted_outputs(spec, theta, base, shift_flat):
    theta_shifted = theta + shift_flat.reshape(theta.shape)
    return all_z_expectations(forward_amps(spec, theta_shifted, base), spec.n_qubits)


def jacobian_parameter_shift(
    spec: QNodeSpec, theta, x=None, base=None
) -> QuantumJacobian:
    """Exact Jacobian from evaluations at theta_j +- pi/2."""
    theta = np.asarray(theta, dtype=np.float64)
    base = _base_amps(spec, x, base)
    n_params = n_parameters(spec)
    values = np.zeros((spec.n_qubits, n_params))
    shift = np.zeros(n_params)
    for j in range(n_params):
        shift[j] = np.pi / 2
        plus = _shifted_outputs(spec, theta, base, shift)
        shift[j] = -np.pi / 2
        minus = _shifted_outputs(spec, theta, base, shift)
        shift[j] = 0.0
        values[:, j] = 0.5 * (plus - minus)
    return QuantumJacobian(values, n_evaluations=2 * n_params)


def jacobian_finite_difference(
    spec: QNodeSpec, theta, x=None, base=None, delta: float = 1e-4
) -> QuantumJacobian:
    """Central-difference Jacobian with step delta."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    theta = np.asarray(theta, dtype=np.float64)
    base = _base_amps(spec, x, base)
    n_params = n_parameters(spec)
    values = np.zeros((spec.n_qubits, n_params))
    shift = np.zeros(n_params)
    for j in range(n_params):
        shift[j] = delta
        plus = _shifted_outputs(spec, theta, base, shift)
        shift[j] = -delta
        minus = _shifted_outputs(spec, theta, base, shift)
        shift[j] = 0.0
        values[:, j] = (plus - minus) / (2.0 * delta)
    return QuantumJacobian(values, n_evaluations=2 * n_params)


def _derivative_matrix(op: GateOp) -> np.ndarray:
    # d/dtheta exp(-i theta P/2) = (-i/2) P R(theta)
    return -0.5j * (_PAULI[op.kind] @ gate_matrix(op))


def jacobian_adjoint(spec: QNodeSpec, theta, x=None, base=None) -> QuantumJacobian:
    """Exact Jacobian from one forward state and reversed gate sweeps.

    All n_qubits observables share a single pass: their bra vectors are
    swept back in a batch while the ket is unwound gate by gate, and each
    parametrized gate contributes 2 Re <b|dU|k>.
    """
    theta = np.asarray(theta, dtype=np.float64)
    base = _base_amps(spec, x, base)
    ops = build_ansatz_circuit(spec, theta)
    _check_rotations_only(ops)
    n_params = n_parameters(spec)
    n = spec.n_qubits
    values = np.zeros((n, n_params))
    if n_params == 0:
        return QuantumJacobian(values, n_evaluations=0, n_sweeps=0)

    psi = forward_amps(spec, theta, base)
    bras = psi[None, :] * z_sign_matrix(n)  # Z_k |psi> for every wire k
    ket = psi
    col = n_params - 1
    for op in reversed(ops):
        adj = target_matrix(op).conj().T
        ket = apply_single_qubit_matrix(
            ket, n, adj, op.targets[0], op.controls, op.control_state
        )
        if op.kind in ROTATION_GATES:
            tket = apply_single_qubit_matrix(
                ket, n, _derivative_matrix(op), op.targets[0]
            )
            values[:, col] = 2.0 * np.real(bras.conj() @ tket)
            col -= 1
        bras = apply_single_qubit_matrix(
            bras, n, adj, op.targets[0], op.controls, op.control_state
        )
    return QuantumJacobian(values, n_evaluations=0, n_sweeps=n)


def jacobian(spec: QNodeSpec, theta, x=None, base=None, config: GradConfig = None):
    """Dispatch to the configured Jacobian engine (SPSA is not one)."""
    config = config or GradConfig()
    if config.method == PARAMETER_SHIFT:
        return jacobian_parameter_shift(spec, theta, x, base)
    if config.method == ADJOINT:
        return jacobian_adjoint(spec, theta, x, base)
    if config.method == FINITE_DIFFERENCE:
        return jacobian_finite_difference(spec, theta, x, base, config.fd_delta)
    raise ValueError(f"{config.method!r} does not produce a Jacobian")


def spsa_loss_gradient(
    loss_fn,
    theta,
    epsilon: float = 0.01,
    num_samples: int = 1,
    rng: np.random.Generator | None = None,
) -> LossGradient:
    """Stochastic gradient of a scalar loss via simultaneous perturbation.

    Every sample draws one Rademacher vector Delta, evaluates the loss at
    theta +- epsilon*Delta, and estimates each component as the scaled
    difference; samples are averaged. Exactly 2*num_samples evaluations.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for _ in range(num_samples):
        delta = rng.integers(0, 2, size=theta.shape) * 2.0 - 1.0
        plus = loss_fn(theta + epsilon * delta)
        minus = loss_fn(theta - epsilon * delta)
        grad += (plus - minus) / (2.0 * epsilon * delta)
    grad /= num_samples
    return LossGradient(grad, n_evaluations=2 * num_samples)
