"""The adversarial training loop.

Each epoch draws a fresh batch of prior samples and target samples,
takes one Adam step on the discriminator (minimizing the smoothed
cross-entropy), re-scores the same fakes with the updated
discriminator, chains its input gradient into the parameter-shift
gradients of the generator circuit, and takes one Adam step on the
three circuit angles. A metric record (KL, losses, gradient norms,
moments, angles) is captured every epoch on fresh metric draws; the
epoch-0 record is captured before any update.

All randomness flows through a single numpy Generator in a documented
order (per epoch: prior batch, target indices, fake shots, generator
shift shots, metric draws), which makes checkpoint/resume bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discriminator import AdamState, MlpParams, adam_step, backward, forward_cached, init_mlp
from .generator import EstimatorConfig, as_theta, generate_batch, param_shift_gradient
from .metrics import grad_norm, histogram, kl_divergence
from .noise import NoiseParams

D_CLAMP = 1e-7

THETA_STAR = (0.35, 2.10, 5.06)
THETA_INIT = (0.31, 1.89, 4.56)


class NumericalAbort(RuntimeError):
    """Raised when training produces non-finite numbers."""


@dataclass(frozen=True)
class TrainConfig:
    """Complete description of one training experiment."""

    epochs: int = 4500
    n_samples: int = 100
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    noise: NoiseParams | None = None
    label_smooth: float = 0.9
    lr_d: float = 1e-2
    lr_g: float = 1e-3
    seed: int = 4
    theta_init: tuple = THETA_INIT
    target_path: str | None = None
    metric_sample_count: int = 1000
    checkpoint_every: int = 500

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not 0 < self.label_smooth <= 1:
            raise ValueError(f"label_smooth must be in (0, 1], got {self.label_smooth}")
        for name in ("lr_d", "lr_g"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.metric_sample_count < 1:
            raise ValueError(f"metric_sample_count must be >= 1, got {self.metric_sample_count}")
        if self.checkpoint_every < 1:
            raise ValueError(f"checkpoint_every must be >= 1, got {self.checkpoint_every}")
        as_theta(self.theta_init)


@dataclass
class EpochRecord:
    """One row of the metric series."""

    epoch: int
    kl: float
    c_d: float
    c_g: float
    d_grad: float
    g_grad: float
    mean_real: float
    mean_fake: float
    std_real: float
    std_fake: float
    theta: np.ndarray

    FIELDS = (
        "epoch", "kl", "c_d", "c_g", "d_grad", "g_grad",
        "mean_real", "mean_fake", "std_real", "std_fake",
        "theta1", "theta2", "theta3",
    )

    def as_row(self) -> list:
        return [
            self.epoch, self.kl, self.c_d, self.c_g, self.d_grad, self.g_grad,
            self.mean_real, self.mean_fake, self.std_real, self.std_fake,
            float(self.theta[0]), float(self.theta[1]), float(self.theta[2]),
        ]

    def validate(self):
        row = self.as_row()
        if not all(np.isfinite(v) for v in row):
            raise NumericalAbort(f"non-finite metric at epoch {self.epoch}: {row}")
        if self.kl < 0 or self.std_real < 0 or self.std_fake < 0:
            raise ValueError(f"negative kl/std at epoch {self.epoch}")


@dataclass
class TrainState:
    """Everything that evolves during training."""

    epoch: int
    theta: np.ndarray
    mlp: MlpParams
    adam_d: AdamState
    adam_g: AdamState
    rng: np.random.Generator
    target: np.ndarray


def make_target(theta_star, n: int, est: EstimatorConfig, rng: np.random.Generator) -> np.ndarray:
    """n noiseless generator outputs at theta_star from z ~ U(-1, 1)."""
    if n < 1:
        raise ValueError(f"target size must be >= 1, got {n}")
    zs = rng.uniform(-1.0, 1.0, n)
    return generate_batch(zs, theta_star, None, est, rng)


def clamp_d(d: np.ndarray) -> np.ndarray:
    """Keep discriminator outputs inside the log-safe open interval."""
    return np.clip(d, D_CLAMP, 1.0 - D_CLAMP)


def discriminator_loss(d_real, d_fake, s: float) -> float:
    """-( mean(s*log d_real) + mean(log(1 - d_fake)) ), s = real-label smoothing."""
    d_real = np.asarray(d_real, dtype=float)
    d_fake = np.asarray(d_fake, dtype=float)
    if np.any(d_real <= 0) or np.any(d_real >= 1) or np.any(d_fake <= 0) or np.any(d_fake >= 1):
        raise ValueError("discriminator outputs must lie strictly inside (0, 1)")
    return float(-(np.mean(s * np.log(d_real)) + np.mean(np.log1p(-d_fake))))


def generator_loss(d_fake) -> float:
    """-mean(log d_fake), the non-saturating generator objective."""
    d_fake = np.asarray(d_fake, dtype=float)
    if np.any(d_fake <= 0) or np.any(d_fake >= 1):
        raise ValueError("discriminator outputs must lie strictly inside (0, 1)")
    return float(-np.mean(np.log(d_fake)))


def init_state(cfg: TrainConfig, target: np.ndarray) -> TrainState:
    """Fresh training state; the MLP gets its own seed-derived init stream."""
    theta = as_theta(cfg.theta_init).copy()
    mlp = init_mlp(cfg.seed)
    return TrainState(
        epoch=0,
        theta=theta,
        mlp=mlp,
        adam_d=AdamState.for_params(mlp.as_list(), cfg.lr_d),
        adam_g=AdamState.for_params([theta], cfg.lr_g),
        rng=np.random.default_rng(cfg.seed),
        target=np.asarray(target, dtype=float),
    )


def epoch_record(state: TrainState, cfg: TrainConfig, c_d=None, c_g=None,
                 d_grad=0.0, g_grad=0.0) -> EpochRecord:
    """Metric snapshot on metric_sample_count fresh prior draws.

    Loss/gradient fields default to the values of the update step that
    produced this state; the epoch-0 snapshot recomputes losses on the
    metric draws and reports zero gradient norms (no update has
    happened yet).
    """
    z_m = state.rng.uniform(-1.0, 1.0, cfg.metric_sample_count)
    fake_m = generate_batch(z_m, state.theta, cfg.noise, cfg.estimator, state.rng)
    if c_d is None or c_g is None:
        d_real = clamp_d(forward_cached(state.mlp, state.target)[0])
        d_fake = clamp_d(forward_cached(state.mlp, fake_m)[0])
        c_d = discriminator_loss(d_real, d_fake, cfg.label_smooth)
        c_g = generator_loss(d_fake)
    rec = EpochRecord(
        epoch=state.epoch,
        kl=kl_divergence(histogram(state.target), histogram(fake_m)),
        c_d=float(c_d),
        c_g=float(c_g),
        d_grad=float(d_grad),
        g_grad=float(g_grad),
        mean_real=float(state.target.mean()),
        mean_fake=float(fake_m.mean()),
        std_real=float(state.target.std()),
        std_fake=float(fake_m.std()),
        theta=state.theta.copy(),
    )
    rec.validate()
    return rec


def train_epoch(state: TrainState, cfg: TrainConfig) -> EpochRecord:
    """One alternating update round; mutates state, returns the record."""
    n = cfg.n_samples
    rng = state.rng

    # 1) fresh batch: prior inputs and target samples (with replacement)
    z = rng.uniform(-1.0, 1.0, n)
    real = state.target[rng.integers(0, state.target.size, n)]

    # 2) generate fakes at the current angles
    fake = generate_batch(z, state.theta, cfg.noise, cfg.estimator, rng)

    # 3) one discriminator step on the smoothed cross-entropy
    d_real, cache_r = forward_cached(state.mlp, real)
    d_fake, cache_f = forward_cached(state.mlp, fake)
    drc, dfc = clamp_d(d_real), clamp_d(d_fake)
    c_d = discriminator_loss(drc, dfc, cfg.label_smooth)
    grads_real, _ = backward(state.mlp, cache_r, -cfg.label_smooth / (n * drc))
    grads_fake, _ = backward(state.mlp, cache_f, 1.0 / (n * (1.0 - dfc)))
    d_grads = [a + b for a, b in zip(grads_real, grads_fake)]
    d_grad = grad_norm(d_grads)
    state.mlp = MlpParams.from_list(adam_step(state.mlp.as_list(), d_grads, state.adam_d))

    # 4) re-score the same fakes with the updated discriminator,
    #    chain into the parameter-shift circuit gradients
    d_fake2, cache2 = forward_cached(state.mlp, fake)
    dfc2 = clamp_d(d_fake2)
    c_g = generator_loss(dfc2)
    _, dl_dx = backward(state.mlp, cache2, -1.0 / (n * dfc2))
    dx_dth = param_shift_gradient(z, state.theta, cfg.noise, cfg.estimator, rng)
    g_vec = dl_dx @ dx_dth
    g_grad = grad_norm(g_vec)
    state.theta = adam_step([state.theta], [g_vec], state.adam_g)[0]

    state.epoch += 1
    if not np.all(np.isfinite(state.theta)):
        raise NumericalAbort(f"non-finite angles at epoch {state.epoch}: {state.theta}")

    # 5) metric snapshot on fresh draws
    return epoch_record(state, cfg, c_d=c_d, c_g=c_g, d_grad=d_grad, g_grad=g_grad)


def train(cfg: TrainConfig, target: np.ndarray, state: TrainState | None = None,
          on_record=None, on_checkpoint=None):
    """Run (or continue) training to cfg.epochs.

    A fresh run emits the epoch-0 record first. on_record fires for
    every new record; on_checkpoint fires every checkpoint_every epochs
    and at the final epoch. Returns (state, list of new records).
    """
    records = []

    def emit(rec):
        records.append(rec)
        if on_record is not None:
            on_record(rec)

    if state is None:
        state = init_state(cfg, target)
        emit(epoch_record(state, cfg))
        if on_checkpoint is not None:
            on_checkpoint(state)
    if state.epoch > cfg.epochs:
        raise ValueError(f"state is at epoch {state.epoch}, beyond the budget {cfg.epochs}")

    while state.epoch < cfg.epochs:
        emit(train_epoch(state, cfg))
        if on_checkpoint is not None and (
            state.epoch % cfg.checkpoint_every == 0 or state.epoch == cfg.epochs
        ):
            on_checkpoint(state)
    return state, records
