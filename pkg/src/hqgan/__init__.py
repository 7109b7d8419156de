"""hqgan: adversarial training of a noisy two-qubit variational generator.

A dense density-matrix simulator of a small parameterized quantum
circuit (with Kraus-operator noise channels), a from-scratch MLP
discriminator, and the alternating GAN training loop that fits the
circuit's measurement distribution to a fixed target.
"""

from .discriminator import AdamState, MlpParams, adam_step, forward, init_mlp
from .generator import (
    CircuitSpec,
    EstimatorConfig,
    build_circuit,
    exact_expectation,
    generate_batch,
    param_shift_gradient,
    shot_expectation,
)
from .metrics import DistributionSummary, Histogram, grad_norm, histogram, kl_divergence, summarize
from .noise import (
    KrausChannel,
    NoiseParams,
    amplitude_damping_kraus,
    combined_kraus,
    damping_probability,
    dephasing_kraus,
    dephasing_probability,
    per_slot_channel,
)
from .qsim import GateOp, apply_channel, apply_unitary, expectation_z, ground_state, sample_z
from .training import (
    THETA_INIT,
    THETA_STAR,
    EpochRecord,
    TrainConfig,
    TrainState,
    discriminator_loss,
    generator_loss,
    make_target,
    train,
    train_epoch,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "MlpParams", "adam_step", "forward", "init_mlp",
    "CircuitSpec", "EstimatorConfig", "build_circuit", "exact_expectation",
    "generate_batch", "param_shift_gradient", "shot_expectation",
    "DistributionSummary", "Histogram", "grad_norm", "histogram", "kl_divergence", "summarize",
    "KrausChannel", "NoiseParams", "amplitude_damping_kraus", "combined_kraus",
    "damping_probability", "dephasing_kraus", "dephasing_probability", "per_slot_channel",
    "GateOp", "apply_channel", "apply_unitary", "expectation_z", "ground_state", "sample_z",
    "THETA_INIT", "THETA_STAR", "EpochRecord", "TrainConfig", "TrainState",
    "discriminator_loss", "generator_loss", "make_target", "train", "train_epoch",
    "__version__",
]
