"""Hybrid encoder head: dense layer on QNode outputs, sigmoid-rescaled
into physical impedance ranges, with analytic backward pass and Adam.

The quantum part of the backward pass chains dL/d<Z> with a Jacobian
engine from :mod:`gradients`; SPSA deliberately has no entry here, it
differentiates the scalar training loss directly (see inversion.train).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import embed_amps
from .gradients import SPSA, GradConfig, jacobian
from .qnode import QNodeSpec, forward_amps, theta_shape
from .statevector import all_z_expectations


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class DenseLayer:
    """Fully connected layer mapping n_qubits expectations to n_outputs."""

    weights: np.ndarray  # (n_outputs, n_qubits)
    bias: np.ndarray  # (n_outputs,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("dense layer shapes inconsistent")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("dense layer parameters must be finite")


@dataclass(frozen=True)
class ElasticBounds:
    """Per-output (min, max) range, in the impedance units of the model."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.shape != upper.shape:
            raise ValueError("bound arrays must share a shape")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def normalize(self, m: np.ndarray) -> np.ndarray:
        return (np.asarray(m, dtype=np.float64) - self.lower) / self.span

    @classmethod
    def from_property_ranges(cls, ranges, block_sizes) -> "ElasticBounds":
        """Broadcast one (min, max) pair per elastic property over blocks."""
        lower = np.concatenate(
            [np.full(size, lo) for (lo, _), size in zip(ranges, block_sizes)]
        )
        upper = np.concatenate(
            [np.full(size, hi) for (_, hi), size in zip(ranges, block_sizes)]
        )
        return cls(lower, upper)


@dataclass
class EncoderGradients:
    """Gradients for the dense layer and the quantum parameters."""

    weights: np.ndarray
    bias: np.ndarray
    theta: np.ndarray
    n_evaluations: int = 0
    n_sweeps: int = 0


def init_parameters(
    spec: QNodeSpec, n_outputs: int, rng_seed: int
) -> tuple[np.ndarray, DenseLayer]:
    """Seeded init: theta ~ U[0, 2pi), Glorot-uniform weights, zero bias."""
    rng = np.random.default_rng(rng_seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=theta_shape(spec))
    limit = np.sqrt(6.0 / (spec.n_qubits + n_outputs))
    weights = rng.uniform(-limit, limit, size=(n_outputs, spec.n_qubits))
    return theta, DenseLayer(weights, np.zeros(n_outputs))


def dense_head(z: np.ndarray, dense: DenseLayer, bounds: ElasticBounds) -> np.ndarray:
    """bounds.lower + sigmoid(W z + b) * (bounds.upper - bounds.lower)."""
    y = dense.weights @ z + dense.bias
    return bounds.lower + sigmoid(y) * bounds.span


def encoder_forward(
    spec: QNodeSpec, theta, dense: DenseLayer, bounds: ElasticBounds, x
) -> np.ndarray:
    """Elastic parameter vector predicted from one seismic input."""
    base = embed_amps(spec.embedding, x)
    z = all_z_expectations(forward_amps(spec, theta, base), spec.n_qubits)
    return dense_head(z, dense, bounds)


def dense_gradients(
    z: np.ndarray, dense: DenseLayer, bounds: ElasticBounds, dL_dm: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic chain through rescale + sigmoid + affine.

    Returns (dW, db, dz); dz feeds the quantum Jacobian contraction.
    """
    y = dense.weights @ z + dense.bias
    s = sigmoid(y)
    dy = np.asarray(dL_dm, dtype=np.float64) * bounds.span * s * (1.0 - s)
    return np.outer(dy, z), dy, dense.weights.T @ dy


def encoder_backward(
    spec: QNodeSpec,
    theta,
    dense: DenseLayer,
    bounds: ElasticBounds,
    x,
    dL_dm: np.ndarray,
    grad_config: GradConfig,
    z: np.ndarray | None = None,
    base: np.ndarray | None = None,
) -> EncoderGradients:
    """Gradients of a scalar loss given dL/dm at the encoder output.

    ``z`` and ``base`` may carry the forward pass's intermediates to
    avoid recomputation; fresh ones are computed otherwise.
    """
    if grad_config.method == SPSA:
        raise ValueError(
            "SPSA differentiates the scalar training loss directly and "
            "does not produce encoder Jacobians"
        )
    if base is None:
        base = embed_amps(spec.embedding, x)
    if z is None:
        z = all_z_expectations(forward_amps(spec, theta, base), spec.n_qubits)
    d_w, d_b, dz = dense_gradients(z, dense, bounds, dL_dm)
    jac = jacobian(spec, theta, base=base, config=grad_config)
    d_theta = (jac.values.T @ dz).reshape(np.asarray(theta).shape)
    return EncoderGradients(d_w, d_b, d_theta, jac.n_evaluations, jac.n_sweeps)


@dataclass
class TrainState:
    """All trainable parameters plus Adam moments and the loss trace."""

    theta: np.ndarray
    dense: DenseLayer
    m_theta: np.ndarray
    v_theta: np.ndarray
    m_weights: np.ndarray
    v_weights: np.ndarray
    m_bias: np.ndarray
    v_bias: np.ndarray
    step: int = 0
    loss_history: list = field(default_factory=list)

    @classmethod
    def create(cls, theta: np.ndarray, dense: DenseLayer) -> "TrainState":
        theta = np.asarray(theta, dtype=np.float64)
        return cls(
            theta=theta,
            dense=dense,
            m_theta=np.zeros_like(theta),
            v_theta=np.zeros_like(theta),
            m_weights=np.zeros_like(dense.weights),
            v_weights=np.zeros_like(dense.weights),
            m_bias=np.zeros_like(dense.bias),
            v_bias=np.zeros_like(dense.bias),
        )

    @property
    def n_quantum_parameters(self) -> int:
        return self.theta.size


def adam_step(
    state: TrainState,
    grads: EncoderGradients,
    lr: float = 0.1,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> TrainState:
    """One bias-corrected Adam update over theta, weights, and bias."""
    triples = (
        (state.theta, np.asarray(grads.theta), state.m_theta, state.v_theta),
        (state.dense.weights, np.asarray(grads.weights), state.m_weights, state.v_weights),
        (state.dense.bias, np.asarray(grads.bias), state.m_bias, state.v_bias),
    )
    for param, grad, _, _ in triples:
        if grad.shape != param.shape:
            raise ValueError(
                f"gradient shape {grad.shape} does not match parameter {param.shape}"
            )
    state.step += 1
    t = state.step
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for param, grad, m, v in triples:
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        param -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state
