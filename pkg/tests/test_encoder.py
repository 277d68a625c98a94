"""Encoder head, backward pass, Adam, and initialization tests."""
import numpy as np
import pytest

from qseisinv.embedding import EmbeddingSpec
from qseisinv.encoder import (
    DenseLayer,
    ElasticBounds,
    EncoderGradients,
    TrainState,
    adam_step,
    dense_head,
    encoder_backward,
    encoder_forward,
    init_parameters,
    sigmoid,
)
from qseisinv.gradients import GradConfig
from qseisinv.qnode import BASIC_ENTANGLER, NO_ANSATZ, QNodeSpec, qnode_forward


def amp_spec(n_qubits, n_layers=2, axis="x", ansatz=BASIC_ENTANGLER):
    return QNodeSpec(
        n_qubits, EmbeddingSpec("amplitude", n_qubits), n_layers, axis, ansatz
    )


def simple_bounds(n, lo=2.0, hi=10.0):
    return ElasticBounds(np.full(n, lo), np.full(n, hi))


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------

def test_zero_parameters_give_midpoint():
    spec = amp_spec(2, n_layers=1)
    dense = DenseLayer(np.zeros((3, 2)), np.zeros(3))
    bounds = simple_bounds(3, 4.0, 8.0)
    m = encoder_forward(spec, np.zeros((1, 2)), dense, bounds, [1.0, 2.0, 0.5, 0.1])
    assert np.allclose(m, 6.0, atol=1e-12)


def test_sigmoid_saturation():
    assert sigmoid(np.array([30.0]))[0] == pytest.approx(1.0, abs=1e-9)
    assert sigmoid(np.array([-30.0]))[0] == pytest.approx(0.0, abs=1e-9)
    big_bias = DenseLayer(np.zeros((2, 2)), np.full(2, 30.0))
    bounds = simple_bounds(2, 1.0, 3.0)
    m = dense_head(np.zeros(2), big_bias, bounds)
    assert np.allclose(m, 3.0, atol=1e-8)


def test_forward_matches_independent_composition():
    rng = np.random.default_rng(4)
    spec = amp_spec(3, n_layers=2, axis="y")
    theta = rng.uniform(0, 2 * np.pi, size=(2, 3))
    dense = DenseLayer(rng.normal(size=(5, 3)), rng.normal(size=5))
    bounds = ElasticBounds(rng.uniform(1, 2, 5), rng.uniform(5, 9, 5))
    x = rng.normal(size=8)
    z = qnode_forward(spec, theta, x)
    expected = bounds.lower + 1.0 / (1.0 + np.exp(-(dense.weights @ z + dense.bias))) * (
        bounds.upper - bounds.lower
    )
    assert np.allclose(encoder_forward(spec, theta, dense, bounds, x), expected, atol=1e-12)


def test_outputs_strictly_inside_bounds():
    rng = np.random.default_rng(9)
    spec = amp_spec(2)
    bounds = simple_bounds(4, 3.0, 7.0)
    for _ in range(25):
        theta = rng.uniform(0, 2 * np.pi, size=(2, 2))
        dense = DenseLayer(rng.normal(scale=5, size=(4, 2)), rng.normal(scale=5, size=4))
        m = encoder_forward(spec, theta, dense, bounds, rng.normal(size=4))
        assert np.all(m > bounds.lower)
        assert np.all(m < bounds.upper)


def test_bounds_validation():
    with pytest.raises(ValueError):
        ElasticBounds(np.array([1.0, 5.0]), np.array([2.0, 5.0]))


def test_bounds_broadcast_per_property():
    b = ElasticBounds.from_property_ranges([(1.0, 2.0), (5.0, 9.0)], [3, 2])
    assert np.array_equal(b.lower, [1, 1, 1, 5, 5])
    assert np.array_equal(b.upper, [2, 2, 2, 9, 9])


# ---------------------------------------------------------------------------
# backward
# ---------------------------------------------------------------------------

def test_zero_upstream_gradient():
    spec = amp_spec(2, n_layers=1)
    theta = np.full((1, 2), 0.3)
    dense = DenseLayer(np.ones((3, 2)), np.zeros(3))
    bounds = simple_bounds(3)
    g = encoder_backward(
        spec, theta, dense, bounds, [1.0, 0.5, 0.2, 0.1], np.zeros(3), GradConfig()
    )
    assert np.allclose(g.weights, 0.0)
    assert np.allclose(g.bias, 0.0)
    assert np.allclose(g.theta, 0.0)


def test_no_ansatz_partition():
    spec = amp_spec(2, ansatz=NO_ANSATZ)
    theta = np.zeros((0, 2))
    dense = DenseLayer(np.ones((3, 2)), np.zeros(3))
    bounds = simple_bounds(3)
    g = encoder_backward(
        spec, theta, dense, bounds, [1.0, 0.5, 0.2, 0.1], np.ones(3), GradConfig()
    )
    assert g.theta.size == 0
    assert not np.allclose(g.weights, 0.0)


def test_spsa_rejected():
    spec = amp_spec(2, n_layers=1)
    with pytest.raises(ValueError):
        encoder_backward(
            spec,
            np.zeros((1, 2)),
            DenseLayer(np.ones((2, 2)), np.zeros(2)),
            simple_bounds(2),
            [1.0, 0.0, 0.0, 0.0],
            np.ones(2),
            GradConfig(method="spsa"),
        )


@pytest.mark.parametrize("method", ["parameter-shift", "adjoint", "finite-difference"])
def test_backward_matches_finite_differences(method):
    rng = np.random.default_rng(77)
    spec = amp_spec(3, n_layers=2)
    theta = rng.uniform(0, 2 * np.pi, size=(2, 3))
    dense = DenseLayer(rng.normal(size=(4, 3)), rng.normal(size=4))
    bounds = ElasticBounds(rng.uniform(1, 2, 4), rng.uniform(6, 8, 4))
    x = rng.normal(size=8)
    target = rng.uniform(3, 6, size=4)

    def loss(th, w, b):
        m = encoder_forward(spec, th, DenseLayer(w, b), bounds, x)
        return float(np.sum((m - target) ** 2))

    m0 = encoder_forward(spec, theta, dense, bounds, x)
    dL_dm = 2.0 * (m0 - target)
    g = encoder_backward(
        spec, theta, dense, bounds, x, dL_dm, GradConfig(method=method)
    )

    delta = 1e-6
    for arr, grad in ((theta, g.theta), (dense.weights, g.weights), (dense.bias, g.bias)):
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + delta
            lp = loss(theta, dense.weights, dense.bias)
            arr[idx] = orig - delta
            lm = loss(theta, dense.weights, dense.bias)
            arr[idx] = orig
            fd = (lp - lm) / (2 * delta)
            assert grad[idx] == pytest.approx(fd, rel=1e-5, abs=1e-8)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

def make_state(n_out=3, n_q=2, layers=1, seed=0):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, size=(layers, n_q))
    dense = DenseLayer(rng.normal(size=(n_out, n_q)), rng.normal(size=n_out))
    return TrainState.create(theta, dense)


def test_adam_zero_gradient_leaves_parameters():
    state = make_state()
    before = state.theta.copy(), state.dense.weights.copy(), state.dense.bias.copy()
    grads = EncoderGradients(
        np.zeros_like(state.dense.weights),
        np.zeros_like(state.dense.bias),
        np.zeros_like(state.theta),
    )
    adam_step(state, grads, lr=0.1)
    assert state.step == 1
    assert np.array_equal(state.theta, before[0])
    assert np.array_equal(state.dense.weights, before[1])
    assert np.array_equal(state.dense.bias, before[2])


def test_adam_first_step_closed_form():
    # after bias correction the first step is -lr * g / (|g| + eps)
    state = make_state(seed=3)
    rng = np.random.default_rng(8)
    g_theta = rng.normal(size=state.theta.shape)
    before = state.theta.copy()
    grads = EncoderGradients(
        np.zeros_like(state.dense.weights),
        np.zeros_like(state.dense.bias),
        g_theta,
    )
    adam_step(state, grads, lr=0.1)
    expected = before - 0.1 * g_theta / (np.abs(g_theta) + 1e-8)
    assert np.allclose(state.theta, expected, atol=1e-12)


def test_adam_descends_quadratic():
    state = make_state(seed=5)
    target = np.zeros_like(state.dense.bias)

    def loss():
        return float(np.sum((state.dense.bias - target) ** 2))

    losses = [loss()]
    for _ in range(25):
        grads = EncoderGradients(
            np.zeros_like(state.dense.weights),
            2.0 * (state.dense.bias - target),
            np.zeros_like(state.theta),
        )
        adam_step(state, grads, lr=0.1)
        losses.append(loss())
    assert losses[-1] < losses[0]


def test_adam_shape_mismatch():
    state = make_state()
    grads = EncoderGradients(
        np.zeros((1, 1)), np.zeros_like(state.dense.bias), np.zeros_like(state.theta)
    )
    with pytest.raises(ValueError):
        adam_step(state, grads)


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def test_init_deterministic_per_seed():
    spec = amp_spec(3)
    t1, d1 = init_parameters(spec, 5, rng_seed=42)
    t2, d2 = init_parameters(spec, 5, rng_seed=42)
    assert np.array_equal(t1, t2)
    assert np.array_equal(d1.weights, d2.weights)
    t3, _ = init_parameters(spec, 5, rng_seed=43)
    assert not np.array_equal(t1, t3)


def test_init_ranges():
    spec = amp_spec(4, n_layers=3)
    theta, dense = init_parameters(spec, 6, rng_seed=1)
    assert theta.shape == (3, 4)
    assert np.all(theta >= 0.0) and np.all(theta < 2 * np.pi)
    limit = np.sqrt(6.0 / (4 + 6))
    assert np.all(np.abs(dense.weights) <= limit)
    assert np.array_equal(dense.bias, np.zeros(6))


def test_init_no_ansatz_empty_theta():
    spec = amp_spec(3, ansatz=NO_ANSATZ)
    theta, _ = init_parameters(spec, 4, rng_seed=0)
    assert theta.shape == (0, 3)
