"""End-to-end inversion: data pipeline, loss, gradient orchestration,
and the training loop over encoder + physics decoder.

Modes
-----
post-stack-1d    one zero-offset trace, acoustic impedance only
pre-stack-1d     one angle gather, P- and S-impedance
post-stack-2d    one lateral section (time x trace), normal incidence
simultaneous-2d  several same-shape sections inverted through one node;
                 doubling the input costs exactly one extra qubit

Whatever the mode, the flattened observed data is amplitude-embedded
into one quantum node and a single dense layer emits every impedance
sample at once; training minimizes

    RMSE(d_obs, d_pred) + reg_weight * RMSE(m_norm, prior_norm)

with the impedances normalized to [0, 1] by the elastic bounds before
the prior term.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingSpec, pad_and_normalize
from .encoder import (
    DenseLayer,
    ElasticBounds,
    EncoderGradients,
    TrainState,
    adam_step,
    dense_gradients,
    dense_head,
    encoder_backward,
    init_parameters,
)
from .forward import (
    ImpedanceModel,
    SeismicGather,
    Wavelet,
    forward_gradient,
    forward_model,
    normal_incidence_reflectivity,
    convolve_same,
    correlate_same,
    ricker,
)
from .gradients import (
    GRAD_METHODS,
    SPSA,
    GradConfig,
    spsa_loss_gradient,
)
from .qnode import BASIC_ENTANGLER, NO_ANSATZ, QNodeSpec, forward_amps
from .statevector import all_z_expectations

POST_STACK_1D = "post-stack-1d"
PRE_STACK_1D = "pre-stack-1d"
POST_STACK_2D = "post-stack-2d"
SIMULTANEOUS_2D = "simultaneous-2d"
MODES = (POST_STACK_1D, PRE_STACK_1D, POST_STACK_2D, SIMULTANEOUS_2D)

_1D_MODES = (POST_STACK_1D, PRE_STACK_1D)


class TrainingError(RuntimeError):
    """Non-finite loss or another unrecoverable condition during training."""


@dataclass
class InversionConfig:
    """Everything a training run depends on; defaults follow the model's
    standard setup (500 epochs, Adam at learning rate 0.1, two entangler
    layers)."""

    epochs: int = 500
    learning_rate: float = 0.1
    reg_weight: float = 0.1
    rng_seed: int = 0
    grad_method: str = "adjoint"
    fd_delta: float = 1e-4
    spsa_epsilon: float = 0.01
    spsa_num_samples: int = 1
    n_layers: int = 2
    rotation_axis: str = "x"
    ansatz: str = BASIC_ENTANGLER
    n_qubits: int = 0  # 0 = derive from the data
    angles: tuple = (0.0,)
    wavelet_frequency: float = 40.0
    dt: float = 0.002
    gamma: float = 0.5
    prior_window: int = 15
    bounds_margin: float = 0.2
    patience: int = 0  # 0 = train the full epoch budget

    def __post_init__(self):
        self.angles = tuple(float(a) for a in self.angles)
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.reg_weight < 0.0:
            raise ValueError("reg_weight must be >= 0")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.grad_method not in GRAD_METHODS:
            raise ValueError(f"unknown gradient method {self.grad_method!r}")
        if self.ansatz not in (BASIC_ENTANGLER, NO_ANSATZ):
            raise ValueError(f"unknown ansatz {self.ansatz!r}")
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be >= 0")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")

    def grad_config(self) -> GradConfig:
        return GradConfig(
            self.grad_method,
            self.fd_delta,
            self.spsa_epsilon,
            self.spsa_num_samples,
            self.rng_seed,
        )


@dataclass
class InversionTask:
    """Observed sections and their low-frequency priors."""

    observed: list
    priors: list
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.observed) == 0 or len(self.observed) != len(self.priors):
            raise ValueError("need one prior per observed section")
        if self.mode in _1D_MODES and len(self.observed) != 1:
            raise ValueError(f"{self.mode} takes exactly one section")
        if self.mode == POST_STACK_2D and len(self.observed) != 1:
            raise ValueError("post-stack-2d takes exactly one section")
        if self.mode == SIMULTANEOUS_2D:
            if len(self.observed) < 2:
                raise ValueError("simultaneous-2d needs at least two sections")
            shapes = {g.data.shape for g in self.observed}
            if len(shapes) != 1:
                raise ValueError("simultaneous sections must share a shape")
        for gather, prior in zip(self.observed, self.priors):
            if self.mode in _1D_MODES:
                if prior.zp.ndim != 1:
                    raise ValueError(f"{self.mode} expects 1-D impedance priors")
                if prior.zp.shape[0] != gather.n_samples:
                    raise ValueError("prior length must match the data rows")
                if self.mode == PRE_STACK_1D and prior.zs is None:
                    raise ValueError("pre-stack inversion needs an S-impedance prior")
                if self.mode == POST_STACK_1D and gather.data.shape[1] != 1:
                    raise ValueError("post-stack-1d expects a single data column")
            else:
                if prior.zp.ndim != 2 or prior.zp.shape != gather.data.shape:
                    raise ValueError("2-D modes need a prior per data sample")
                if any(a != 0.0 for a in gather.angles):
                    raise ValueError("2-D sections are normal-incidence only")


@dataclass
class MisfitReport:
    """RMSE between estimate and truth, in the tables' units and layout."""

    zp_rmse: float
    zs_rmse: float | None = None
    seismic_rmse: tuple | None = None  # one value per angle / column


@dataclass
class InversionResult:
    state: TrainState
    models: list
    predicted: list
    loss_history: np.ndarray
    n_qubits: int
    bounds: ElasticBounds
    evals_per_epoch: int
    total_evaluations: int
    wall_time_s: float = 0.0


def rmse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def flatten_input(task: InversionTask) -> tuple[np.ndarray, int]:
    """Concatenate the sections (section-major, then column, then time),
    zero-pad to a power of two, and normalize for amplitude embedding."""
    parts = [g.data.T.ravel() for g in task.observed]
    p = pad_and_normalize(np.concatenate(parts))
    return p.values, p.n_qubits


def _section_blocks(task: InversionTask):
    """Per-section (shape, has_zs) of the model vector layout."""
    return [
        (prior.zp.shape, prior.zs is not None) for prior in task.priors
    ]


def model_vector_size(task: InversionTask) -> int:
    return sum(
        (2 if has_zs else 1) * int(np.prod(shape))
        for shape, has_zs in _section_blocks(task)
    )


def split_model_vector(m_flat: np.ndarray, task: InversionTask) -> list:
    """Inverse of the flat layout: one ImpedanceModel per section."""
    models = []
    pos = 0
    for shape, has_zs in _section_blocks(task):
        size = int(np.prod(shape))
        zp = m_flat[pos : pos + size].reshape(shape)
        pos += size
        zs = None
        if has_zs:
            zs = m_flat[pos : pos + size].reshape(shape)
            pos += size
        models.append(ImpedanceModel(zp, zs))
    return models


def flat_prior(task: InversionTask) -> np.ndarray:
    parts = []
    for prior in task.priors:
        parts.append(prior.zp.ravel())
        if prior.zs is not None:
            parts.append(prior.zs.ravel())
    return np.concatenate(parts)


def bounds_for_task(task: InversionTask, margin: float) -> ElasticBounds:
    """One (min, max) pair per elastic property from the priors, widened
    by ``margin`` of that property's span, broadcast over the layout."""

    def prop_range(arrays):
        lo = min(float(a.min()) for a in arrays)
        hi = max(float(a.max()) for a in arrays)
        span = hi - lo
        if span == 0.0:
            span = max(abs(hi), 1.0)
        return lo - margin * span, hi + margin * span

    zp_range = prop_range([p.zp for p in task.priors])
    zs_arrays = [p.zs for p in task.priors if p.zs is not None]
    zs_range = prop_range(zs_arrays) if zs_arrays else None

    ranges, sizes = [], []
    for shape, has_zs in _section_blocks(task):
        size = int(np.prod(shape))
        ranges.append(zp_range)
        sizes.append(size)
        if has_zs:
            ranges.append(zs_range)
            sizes.append(size)
    return ElasticBounds.from_property_ranges(ranges, sizes)


def _stack_gathers(gathers) -> np.ndarray:
    if isinstance(gathers, SeismicGather):
        gathers = [gathers]
    return np.concatenate([g.data.ravel() for g in gathers])


def loss(
    observed,
    predicted_seis,
    m_pred: np.ndarray,
    m_prior: np.ndarray,
    bounds: ElasticBounds,
    reg_weight: float,
) -> float:
    """Seismic RMSE plus the bounds-normalized low-frequency prior RMSE."""
    value = rmse(_stack_gathers(observed), _stack_gathers(predicted_seis))
    if reg_weight != 0.0:
        value += reg_weight * rmse(bounds.normalize(m_pred), bounds.normalize(m_prior))
    return value


def _forward_section(
    model: ImpedanceModel, gather: SeismicGather, wavelet: Wavelet,
    gamma: float, mode: str,
) -> SeismicGather:
    if mode in _1D_MODES:
        return forward_model(model, gather.angles, wavelet, gamma)
    cols = [
        convolve_same(normal_incidence_reflectivity(model.zp[:, c]), wavelet)
        for c in range(model.zp.shape[1])
    ]
    return SeismicGather(np.stack(cols, axis=1), gather.angles, wavelet.dt)


def _gradient_section(
    model: ImpedanceModel, angles: tuple, dblock: np.ndarray, wavelet: Wavelet,
    gamma: float, mode: str,
) -> np.ndarray:
    """dL/d(model block), flattened in the layout order."""
    if mode in _1D_MODES:
        dzp, dzs = forward_gradient(model, angles, wavelet, gamma, dblock)
        return dzp if dzs is None else np.concatenate([dzp, dzs])
    # 2-D: each column is an independent normal-incidence trace
    n_t, n_x = model.zp.shape
    dzp = np.empty((n_t, n_x))
    for c in range(n_x):
        dr = correlate_same(dblock[:, c], wavelet)[: n_t - 1]
        g_ln = np.zeros(n_t)
        g_ln[1:] += 0.5 * dr
        g_ln[:-1] -= 0.5 * dr
        dzp[:, c] = g_ln / model.zp[:, c]
    return dzp.ravel()


@dataclass
class _EpochContext:
    """Constant per-run data threaded through the epoch closures."""

    task: InversionTask
    config: InversionConfig
    spec: QNodeSpec
    base: np.ndarray
    bounds: ElasticBounds
    prior_flat: np.ndarray
    wavelet: Wavelet
    obs_flat: np.ndarray

    def predict(self, theta, dense):
        z = all_z_expectations(
            forward_amps(self.spec, theta, self.base), self.spec.n_qubits
        )
        m_flat = dense_head(z, dense, self.bounds)
        models = split_model_vector(m_flat, self.task)
        predicted = [
            _forward_section(m, g, self.wavelet, self.config.gamma, self.task.mode)
            for m, g in zip(models, self.task.observed)
        ]
        return z, m_flat, models, predicted

    def loss_value(self, m_flat, predicted) -> float:
        return loss(
            self.task.observed,
            predicted,
            m_flat,
            self.prior_flat,
            self.bounds,
            self.config.reg_weight,
        )

    def loss_of_theta(self, dense):
        def fn(theta_trial):
            _, m_flat, _, predicted = self.predict(theta_trial, dense)
            return self.loss_value(m_flat, predicted)

        return fn

    def model_gradient(self, m_flat, models, predicted) -> np.ndarray:
        """dL/dm through the decoder plus the prior regularization term."""
        pred_flat = _stack_gathers(predicted)
        resid = pred_flat - self.obs_flat
        data_rmse = float(np.sqrt(np.mean(resid ** 2)))
        dL_dm = np.zeros_like(m_flat)
        if data_rmse > 0.0:
            dL_dd = resid / (resid.size * data_rmse)
            pos_data = 0
            pos_model = 0
            for model, gather in zip(models, self.task.observed):
                count = gather.data.size
                dblock = dL_dd[pos_data : pos_data + count].reshape(gather.data.shape)
                pos_data += count
                block = _gradient_section(
                    model, gather.angles, dblock, self.wavelet,
                    self.config.gamma, self.task.mode,
                )
                dL_dm[pos_model : pos_model + block.size] = block
                pos_model += block.size
        if self.config.reg_weight != 0.0:
            err = self.bounds.normalize(m_flat) - self.bounds.normalize(self.prior_flat)
            reg_rmse = float(np.sqrt(np.mean(err ** 2)))
            if reg_rmse > 0.0:
                dL_dm += (
                    self.config.reg_weight
                    * err
                    / (err.size * reg_rmse * self.bounds.span)
                )
        return dL_dm


def _context(task: InversionTask, config: InversionConfig) -> _EpochContext:
    """Resolve everything an epoch needs (embedding, bounds, wavelet)."""
    x, derived_qubits = flatten_input(task)
    n_qubits = config.n_qubits or derived_qubits
    if n_qubits < derived_qubits:
        raise ValueError(
            f"{derived_qubits} qubits needed for this data, got {config.n_qubits}"
        )
    base = np.zeros(2 ** n_qubits, dtype=np.complex128)
    base[: x.size] = x
    spec = QNodeSpec(
        n_qubits,
        EmbeddingSpec("amplitude", n_qubits),
        config.n_layers,
        config.rotation_axis,
        config.ansatz,
    )
    wavelet = ricker(config.wavelet_frequency, config.dt)
    for gather in task.observed:
        if abs(gather.dt - config.dt) > 1e-12:
            raise ValueError(
                f"observed dt {gather.dt} differs from configured dt {config.dt}"
            )
    return _EpochContext(
        task=task,
        config=config,
        spec=spec,
        base=base,
        bounds=bounds_for_task(task, config.bounds_margin),
        prior_flat=flat_prior(task),
        wavelet=wavelet,
        obs_flat=_stack_gathers(task.observed),
    )


def training_loss(task, config, theta, dense: DenseLayer) -> float:
    """The full training loss at the given parameters (one forward pass)."""
    ctx = _context(task, config)
    _, m_flat, _, predicted = ctx.predict(theta, dense)
    return ctx.loss_value(m_flat, predicted)


def training_gradients(task, config, theta, dense: DenseLayer):
    """One forward/backward pass: (loss, EncoderGradients).

    Jacobian-based methods only; train() handles the SPSA path itself.
    """
    ctx = _context(task, config)
    z, m_flat, models, predicted = ctx.predict(theta, dense)
    value = ctx.loss_value(m_flat, predicted)
    dL_dm = ctx.model_gradient(m_flat, models, predicted)
    grads = encoder_backward(
        ctx.spec, theta, dense, ctx.bounds, None, dL_dm,
        config.grad_config(), z=z, base=ctx.base,
    )
    return value, grads


def train(task: InversionTask, config: InversionConfig) -> InversionResult:
    """Full-gradient training of the hybrid model on one inversion task.

    Deterministic for a given (task, config): all randomness flows from
    config.rng_seed. Raises TrainingError (with the epoch index) on a
    non-finite loss.
    """
    start = time.perf_counter()
    ctx = _context(task, config)
    spec, bounds = ctx.spec, ctx.bounds
    base = ctx.base
    theta, dense = init_parameters(spec, model_vector_size(task), config.rng_seed)
    state = TrainState.create(theta, dense)
    grad_config = config.grad_config()
    spsa_rng = np.random.default_rng(config.rng_seed)

    evals_per_epoch = 0
    total_evals = 0
    best_loss = np.inf
    stall = 0
    for epoch in range(config.epochs):
        z, m_flat, models, predicted = ctx.predict(state.theta, state.dense)
        value = ctx.loss_value(m_flat, predicted)
        if not np.isfinite(value):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        state.loss_history.append(value)

        dL_dm = ctx.model_gradient(m_flat, models, predicted)
        if config.grad_method == SPSA:
            d_w, d_b, _ = dense_gradients(z, state.dense, bounds, dL_dm)
            if state.theta.size:
                sg = spsa_loss_gradient(
                    ctx.loss_of_theta(state.dense),
                    state.theta,
                    config.spsa_epsilon,
                    config.spsa_num_samples,
                    spsa_rng,
                )
                d_theta, extra = sg.values, sg.n_evaluations
            else:
                d_theta, extra = np.zeros_like(state.theta), 0
            grads = EncoderGradients(d_w, d_b, d_theta)
            epoch_evals = 1 + extra
        else:
            grads = encoder_backward(
                spec, state.theta, state.dense, bounds, None, dL_dm,
                grad_config, z=z, base=base,
            )
            epoch_evals = 1 + grads.n_evaluations + grads.n_sweeps
        adam_step(state, grads, lr=config.learning_rate)
        evals_per_epoch = epoch_evals
        total_evals += epoch_evals

        if config.patience:
            if value < best_loss - 1e-12:
                best_loss, stall = value, 0
            else:
                stall += 1
                if stall >= config.patience:
                    break

    _, m_flat, models, predicted = ctx.predict(state.theta, state.dense)
    total_evals += 1
    return InversionResult(
        state=state,
        models=models,
        predicted=predicted,
        loss_history=np.asarray(state.loss_history),
        n_qubits=spec.n_qubits,
        bounds=bounds,
        evals_per_epoch=evals_per_epoch,
        total_evaluations=total_evals,
        wall_time_s=time.perf_counter() - start,
    )


def evaluate(
    estimate: ImpedanceModel,
    truth: ImpedanceModel,
    predicted: SeismicGather | None = None,
    observed: SeismicGather | None = None,
) -> MisfitReport:
    """Plain RMSE misfits between estimated and true models (and, when
    both gathers are given, per-angle seismic misfits)."""
    zp = rmse(estimate.zp, truth.zp)
    zs = None
    if estimate.zs is not None and truth.zs is not None:
        zs = rmse(estimate.zs, truth.zs)
    seismic = None
    if predicted is not None and observed is not None:
        if predicted.data.shape != observed.data.shape:
            raise ValueError("predicted and observed gathers differ in shape")
        seismic = tuple(
            rmse(predicted.data[:, j], observed.data[:, j])
            for j in range(observed.data.shape[1])
        )
    return MisfitReport(zp, zs, seismic)
