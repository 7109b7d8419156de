"""The variational quantum generator.

Builds the two-qubit encoding + variational circuit for an input z,
evaluates its first-qubit Z expectation exactly or from measurement
shots under a configurable noise model, and differentiates it with the
parameter-shift rule.

Circuit layout (8 gates, measurement on qubit 0):

    RY(arcsin z) on q0, q1     -- encoding layer 1
    RZ(arccos z^2) on q0, q1   -- encoding layer 2
    RY(theta1) on q0
    RY(theta2) on q1
    CNOT(0 -> 1)
    RY(theta3) on q0

When a noise model is present, every gate is followed by noisy identity
slots (one per single-qubit gate, round(t2/t1) for the CNOT) carrying
one application of the per-slot Kraus channel on the acted-upon
qubit(s). Readout noise acts at measurement: per-shot bit flips in shot
mode, the affine correction (p00 + p11 - 1) * <Z> + (p00 - p11) in
exact mode.

A batched kernel evaluates many z values at once; channels are folded
into precomposed 16x16 superoperators so noisy evaluation costs about
the same as noiseless. The scalar public functions and the batched
paths follow the same definitions and agree to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import NoiseParams, noisy_slot_count, per_slot_channel
from .qsim import GateOp, apply_channel, apply_unitary, expectation_z, ground_state

THETA_SIZE = 3

ESTIMATOR_MODES = ("exact", "shots")


@dataclass(frozen=True)
class EstimatorConfig:
    """How expectation values are estimated.

    mode 'exact' returns Tr(rho Z) directly; 'shots' draws n_shots
    simulated measurements. readout_enabled gates whether readout
    confusion is applied in shot mode (it only ever acts when the noise
    model also enables it).
    """

    mode: str = "exact"
    n_shots: int = 1000
    readout_enabled: bool = True

    def __post_init__(self):
        if self.mode not in ESTIMATOR_MODES:
            raise ValueError(f"estimator mode must be one of {ESTIMATOR_MODES}, got {self.mode!r}")
        if self.n_shots < 1:
            raise ValueError(f"n_shots must be >= 1, got {self.n_shots}")


@dataclass(frozen=True)
class CircuitSpec:
    """An ordered gate list with the measured qubit and which gates train."""

    gates: tuple[GateOp, ...]
    measured_qubit: int = 0
    trainable_indices: tuple[int, ...] = ()


def as_theta(theta) -> np.ndarray:
    """Validate and convert trainable angles to a float64 array of shape (3,)."""
    arr = np.asarray(theta, dtype=float)
    if arr.shape != (THETA_SIZE,):
        raise ValueError(f"theta must have shape ({THETA_SIZE},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"theta must be finite, got {arr}")
    return arr


def encoding_angles(z: float) -> tuple[float, float]:
    """(arcsin z, arccos z^2) with clamping to absorb float drift at |z|=1."""
    if abs(z) > 1.0 + 1e-12:
        raise ValueError(f"input z must lie in [-1, 1], got {z}")
    zc = min(1.0, max(-1.0, float(z)))
    return float(np.arcsin(zc)), float(np.arccos(zc * zc))


def build_circuit(z: float, theta) -> CircuitSpec:
    """The fixed encoding + variational topology for one input z."""
    th = as_theta(theta)
    a, b = encoding_angles(z)
    gates = (
        GateOp("RY", a, (0,)),
        GateOp("RY", a, (1,)),
        GateOp("RZ", b, (0,)),
        GateOp("RZ", b, (1,)),
        GateOp("RY", th[0], (0,)),
        GateOp("RY", th[1], (1,)),
        GateOp("CNOT", None, (0, 1)),
        GateOp("RY", th[2], (0,)),
    )
    return CircuitSpec(gates=gates, measured_qubit=0, trainable_indices=(4, 5, 7))


def _gate_noise_enabled(noise: NoiseParams | None) -> bool:
    return noise is not None and (noise.damping_enabled or noise.dephasing_enabled)


def _readout_active(noise: NoiseParams | None, est: EstimatorConfig | None = None) -> bool:
    if noise is None or not noise.readout_enabled:
        return False
    return est is None or est.readout_enabled


def final_state(z: float, theta, noise: NoiseParams | None = None) -> np.ndarray:
    """Density matrix after the full (optionally noisy) circuit.

    Reference scalar path: applies gates and noisy-identity slots one
    by one through the qsim primitives.
    """
    spec = build_circuit(z, theta)
    rho = ground_state(2)
    slot = per_slot_channel(noise) if _gate_noise_enabled(noise) else None
    for g in spec.gates:
        rho = apply_unitary(rho, g)
        if slot is not None:
            for _ in range(noisy_slot_count(g, noise)):
                rho = apply_channel(rho, slot.on(*g.targets))
    return rho


def exact_expectation(z: float, theta, noise: NoiseParams | None = None) -> float:
    """<Z> of qubit 0 after the circuit, with affine readout correction."""
    rho = final_state(z, theta, noise)
    e = expectation_z(rho, 0)
    if _readout_active(noise):
        e = (noise.p00 + noise.p11 - 1.0) * e + (noise.p00 - noise.p11)
    return float(np.clip(e, -1.0, 1.0))


def shot_expectation(
    z: float,
    theta,
    noise: NoiseParams | None,
    est: EstimatorConfig,
    rng: np.random.Generator,
) -> float:
    """Estimate <Z> from est.n_shots simulated measurements.

    Builds the final density matrix once, draws all measurement bits,
    then (if readout noise is active) draws one flip per shot. Returns
    (n0 - n1) / n_shots.
    """
    if est.mode != "shots":
        raise ValueError(f"shot_expectation requires mode 'shots', got {est.mode!r}")
    rho = final_state(z, theta, noise)
    e = expectation_z(rho, 0)
    return _sample_shots(np.array([e]), noise, est, rng)[0]


def generate_batch(
    zs,
    theta,
    noise: NoiseParams | None,
    est: EstimatorConfig,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Elementwise generator outputs for a batch of inputs, in order."""
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    if zs.size == 0:
        raise ValueError("generate_batch requires a nonempty input batch")
    e = _batch_raw_expectations(zs, as_theta(theta), noise)
    if est.mode == "exact":
        if _readout_active(noise, est):
            e = (noise.p00 + noise.p11 - 1.0) * e + (noise.p00 - noise.p11)
        return np.clip(e, -1.0, 1.0)
    if rng is None:
        raise ValueError("shot mode requires an rng")
    return _sample_shots(e, noise, est, rng)


def param_shift_gradient(
    z,
    theta,
    noise: NoiseParams | None = None,
    est: EstimatorConfig | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """d<Z>/d(theta_k) by the parameter-shift rule.

    For each k in order: evaluate at theta_k + pi/2 then theta_k - pi/2
    with the configured estimator and halve the difference. Exact even
    with interleaved parameter-independent channels. Scalar z gives
    shape (3,); a batch of z gives shape (len(z), 3).
    """
    th = as_theta(theta)
    est = est or EstimatorConfig()
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    scalar = np.ndim(z) == 0
    grads = np.empty((zs.size, THETA_SIZE))
    for k in range(THETA_SIZE):
        plus, minus = th.copy(), th.copy()
        plus[k] += np.pi / 2.0
        minus[k] -= np.pi / 2.0
        e_plus = generate_batch(zs, plus, noise, est, rng)
        e_minus = generate_batch(zs, minus, noise, est, rng)
        grads[:, k] = (e_plus - e_minus) / 2.0
    return grads[0] if scalar else grads


# ---------------------------------------------------------------------------
# Batched kernel
# ---------------------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)
_CNOT01 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_Z0_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])


def _ry_batch(angles: np.ndarray) -> np.ndarray:
    c, s = np.cos(angles / 2.0), np.sin(angles / 2.0)
    u = np.zeros(angles.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = c
    u[..., 0, 1] = -s
    u[..., 1, 0] = s
    u[..., 1, 1] = c
    return u


def _rz_batch(angles: np.ndarray) -> np.ndarray:
    u = np.zeros(angles.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = np.exp(-1j * angles / 2.0)
    u[..., 1, 1] = np.exp(1j * angles / 2.0)
    return u


def _embed_batch(u: np.ndarray, qubit: int) -> np.ndarray:
    """kron(u, I) or kron(I, u) over a leading batch axis."""
    out = np.zeros(u.shape[:-2] + (4, 4), dtype=complex)
    if qubit == 0:
        out[..., 0:2, 0:2] = u[..., 0:1, 0:1] * _I2
        out[..., 0:2, 2:4] = u[..., 0:1, 1:2] * _I2
        out[..., 2:4, 0:2] = u[..., 1:2, 0:1] * _I2
        out[..., 2:4, 2:4] = u[..., 1:2, 1:2] * _I2
    else:
        out[..., 0:2, 0:2] = u
        out[..., 2:4, 2:4] = u
    return out


def _slot_superoperators(noise: NoiseParams) -> dict:
    """Precomposed 16x16 superoperators for the noisy-identity slots.

    vec(K rho K^dagger) = kron(K, conj(K)) vec(rho) with row-major vec,
    so a full channel on one qubit is the sum of those Kronecker
    products over its embedded operators. Slots that always occur
    together (the CNOT's n slots on both qubits) are folded into a
    single matrix.
    """
    slot = per_slot_channel(noise)
    sup = {}
    for q in (0, 1):
        acc = np.zeros((16, 16), dtype=complex)
        for k in slot.operators:
            kf = _embed_batch(np.asarray(k, dtype=complex)[None], q)[0]
            acc += np.kron(kf, kf.conj())
        sup[q] = acc
    both = sup[1] @ sup[0]
    n_cnot = noisy_slot_count(GateOp("CNOT", None, (0, 1)), noise)
    sup["cnot"] = np.linalg.matrix_power(both, n_cnot)
    return sup


def _batch_raw_expectations(zs: np.ndarray, theta: np.ndarray, noise: NoiseParams | None) -> np.ndarray:
    """Exact <Z0> per element, before any readout correction."""
    z = np.clip(zs, -1.0, 1.0)
    if np.any(np.abs(zs) > 1.0 + 1e-12):
        raise ValueError("input z values must lie in [-1, 1]")
    n = z.size
    a = np.arcsin(z)
    b = np.arccos(z * z)
    sup = _slot_superoperators(noise) if _gate_noise_enabled(noise) else None

    rho = np.zeros((n, 4, 4), dtype=complex)
    rho[:, 0, 0] = 1.0

    const = np.ones(1)
    steps = (
        (_embed_batch(_ry_batch(a), 0), 0),
        (_embed_batch(_ry_batch(a), 1), 1),
        (_embed_batch(_rz_batch(b), 0), 0),
        (_embed_batch(_rz_batch(b), 1), 1),
        (_embed_batch(_ry_batch(const * theta[0]), 0), 0),
        (_embed_batch(_ry_batch(const * theta[1]), 1), 1),
        (_CNOT01[None], "cnot"),
        (_embed_batch(_ry_batch(const * theta[2]), 0), 0),
    )
    for u, slot_key in steps:
        rho = u @ rho @ np.swapaxes(u, -1, -2).conj()
        if sup is not None:
            rho = (rho.reshape(n, 16) @ sup[slot_key].T).reshape(n, 4, 4)
    e = np.einsum("bii,i->b", rho, _Z0_SIGNS).real
    return np.clip(e, -1.0, 1.0)


def _sample_shots(
    exacts: np.ndarray,
    noise: NoiseParams | None,
    est: EstimatorConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Shot-sample each exact expectation, element by element.

    Per element: est.n_shots uniform draws decide the measurement bits,
    then (if readout is active) est.n_shots more decide the flips. The
    element-major order makes a batched call consume the rng exactly
    like sequential scalar calls.
    """
    readout = _readout_active(noise, est)
    out = np.empty(exacts.size)
    for i, e in enumerate(exacts):
        p0 = (1.0 + e) / 2.0
        bits = rng.random(est.n_shots) >= p0
        if readout:
            u = rng.random(est.n_shots)
            bits = np.where(bits, u < noise.p11, u >= noise.p00)
        out[i] = 1.0 - 2.0 * float(np.mean(bits))
    return out
