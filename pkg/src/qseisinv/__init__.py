"""Hybrid quantum-classical inversion of seismic data for P- and S-impedance.

A statevector quantum simulator with amplitude/angle feature maps and a
basic entangler ansatz feeds one dense classical layer; a convolutional
physics decoder turns predicted impedances back into seismic data, and
the whole chain trains by minimizing the data misfit plus a
low-frequency prior term. Gradients of the quantum layer come from four
interchangeable engines (parameter shift, adjoint, finite difference,
SPSA).
"""

__version__ = "0.1.0"

from .embedding import (
    EmbeddingError,
    EmbeddingSpec,
    amplitude_embed,
    amplitude_embedding_circuit,
    angle_embed,
    pad_and_normalize,
)
from .encoder import (
    DenseLayer,
    ElasticBounds,
    TrainState,
    adam_step,
    encoder_backward,
    encoder_forward,
    init_parameters,
)
from .forward import (
    ImpedanceModel,
    SeismicGather,
    Wavelet,
    aki_richards_reflectivity,
    build_prior,
    convolve_same,
    forward_gradient,
    forward_model,
    normal_incidence_reflectivity,
    ricker,
)
from .gradients import (
    GradConfig,
    QuantumJacobian,
    jacobian,
    jacobian_adjoint,
    jacobian_finite_difference,
    jacobian_parameter_shift,
    spsa_loss_gradient,
)
from .inversion import (
    InversionConfig,
    InversionResult,
    InversionTask,
    MisfitReport,
    TrainingError,
    evaluate,
    flatten_input,
    loss,
    rmse,
    train,
)
from .qnode import QNodeSpec, build_ansatz_circuit, qnode_forward
from .statevector import (
    Gate,
    GateOp,
    StateVector,
    apply_circuit,
    apply_gate,
    basis_state,
    bloch_state,
    expectation_z,
    gate_matrix,
)
