"""Noise channels: amplitude damping, dephasing, their combination,
readout confusion, and the gate-time-based noisy-identity schedule.

Channel probabilities derive from device times (T1, T2, gate times) or
from explicit overrides used in the high-noise studies. Readout noise
is not a Kraus channel; it acts classically on measured bits (or as an
affine correction on exact expectations).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qsim import GateOp

CHANNEL_KINDS = ("damping", "dephasing", "readout")


@dataclass(frozen=True)
class KrausChannel:
    """An ordered set of single-qubit Kraus operators plus the qubits it acts on."""

    operators: tuple
    label: str
    qubits: tuple[int, ...] = (0,)

    def on(self, *qubits: int) -> "KrausChannel":
        """Same operators, acting on the given qubits."""
        return KrausChannel(self.operators, self.label, tuple(qubits))


@dataclass(frozen=True)
class NoiseParams:
    """Device noise model parameters.

    Times are seconds. p00/p11 are the readout assignment probabilities
    p(0|0) and p(1|1). The overrides, when set, replace the
    time-derived damping/dephasing probabilities (used for the
    high-noise single-channel studies).
    """

    T1: float = 15e-6
    T2: float = 18e-6
    t1: float = 50e-9
    t2: float = 400e-9
    p00: float = 0.91
    p11: float = 0.91
    override_p_damp: float | None = None
    override_p_deph: float | None = None
    enabled: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("T1", "T2", "t1", "t2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.T2 > 2 * self.T1:
            raise ValueError(f"unphysical dephasing: T2={self.T2} exceeds 2*T1={2 * self.T1}")
        for name in ("p00", "p11", "override_p_damp", "override_p_deph"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        bad = set(self.enabled) - set(CHANNEL_KINDS)
        if bad:
            raise ValueError(f"unknown channel kind(s) {sorted(bad)}; known: {CHANNEL_KINDS}")
        object.__setattr__(self, "enabled", frozenset(self.enabled))

    @property
    def damping_enabled(self) -> bool:
        return "damping" in self.enabled

    @property
    def dephasing_enabled(self) -> bool:
        return "dephasing" in self.enabled

    @property
    def readout_enabled(self) -> bool:
        return "readout" in self.enabled


def damping_probability(t: float, T1: float) -> float:
    """Amplitude damping probability over duration t: 1 - exp(-t/T1)."""
    if t < 0:
        raise ValueError(f"negative time {t}")
    if T1 <= 0:
        raise ValueError(f"T1 must be > 0, got {T1}")
    return float(-np.expm1(-t / T1))


def dephasing_probability(t: float, T1: float, T2: float) -> float:
    """Pure dephasing probability over duration t: 1 - exp[-2t(1/T2 - 1/(2 T1))]."""
    if t < 0:
        raise ValueError(f"negative time {t}")
    if T1 <= 0 or T2 <= 0:
        raise ValueError(f"T1 and T2 must be > 0, got T1={T1}, T2={T2}")
    if T2 > 2 * T1:
        raise ValueError(f"unphysical combination: T2={T2} exceeds 2*T1={2 * T1}")
    rate = 2.0 * t * (1.0 / T2 - 1.0 / (2.0 * T1))
    return float(-np.expm1(-rate))


def amplitude_damping_kraus(p: float) -> KrausChannel:
    """Energy decay |1> -> |0> with probability p."""
    _check_probability(p)
    k1 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    k2 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    ch = KrausChannel((k1, k2), f"damping(p={p:g})")
    check_completeness(ch)
    return ch


def dephasing_kraus(p: float) -> KrausChannel:
    """Coherence loss with probability p, populations untouched."""
    _check_probability(p)
    k1 = np.sqrt(1 - p) * np.eye(2, dtype=complex)
    k2 = np.array([[np.sqrt(p), 0], [0, 0]], dtype=complex)
    k3 = np.array([[0, 0], [0, np.sqrt(p)]], dtype=complex)
    ch = KrausChannel((k1, k2, k3), f"dephasing(p={p:g})")
    check_completeness(ch)
    return ch


def combined_kraus(ch_a: KrausChannel, ch_b: KrausChannel) -> KrausChannel:
    """Products {A_i B_j}; acts like ch_b followed by ch_a."""
    check_completeness(ch_a)
    check_completeness(ch_b)
    ops = tuple(a @ b for a in ch_a.operators for b in ch_b.operators)
    ch = KrausChannel(ops, f"{ch_a.label}*{ch_b.label}")
    check_completeness(ch)
    return ch


def check_completeness(ch: KrausChannel, tol=1e-10):
    """Raise if sum_k K_k^dagger K_k deviates from the identity."""
    acc = sum(k.conj().T @ k for k in ch.operators)
    dev = np.abs(acc - np.eye(acc.shape[0])).max()
    if dev > tol:
        raise ValueError(f"channel {ch.label!r} violates completeness by {dev:.3e}")


def readout_flip(bit: int, p00: float, p11: float, rng: np.random.Generator) -> int:
    """Classical assignment error on one measured bit.

    A true 0 is reported as 0 with probability p00; a true 1 as 1 with
    probability p11. Consumes exactly one uniform draw.
    """
    u = rng.random()
    if bit == 0:
        return 0 if u < p00 else 1
    return 1 if u < p11 else 0


def noisy_slot_count(gate: GateOp, params: NoiseParams) -> int:
    """Number of noisy identity slots to insert after a gate.

    n = round(t_gate / t_identity) with the identity-gate time equal to
    the single-qubit gate time; at least 1 when any channel is enabled.
    """
    t_gate = params.t2 if gate.kind == "CNOT" else params.t1
    return max(1, round(t_gate / params.t1))


def slot_probabilities(params: NoiseParams) -> tuple[float, float]:
    """(p_damp, p_deph) for one noisy-identity slot, honoring overrides."""
    p_damp = params.override_p_damp
    if p_damp is None:
        p_damp = damping_probability(params.t1, params.T1)
    p_deph = params.override_p_deph
    if p_deph is None:
        p_deph = dephasing_probability(params.t1, params.T1, params.T2)
    return p_damp, p_deph


def per_slot_channel(params: NoiseParams) -> KrausChannel:
    """The single-qubit channel applied once per noisy-identity slot."""
    p_damp, p_deph = slot_probabilities(params)
    if params.damping_enabled and params.dephasing_enabled:
        return combined_kraus(amplitude_damping_kraus(p_damp), dephasing_kraus(p_deph))
    if params.damping_enabled:
        return amplitude_damping_kraus(p_damp)
    if params.dephasing_enabled:
        return dephasing_kraus(p_deph)
    raise ValueError(
        "no gate-noise channels enabled; readout noise acts at measurement, not in slots"
    )


def _check_probability(p):
    if not 0 <= p <= 1:
        raise ValueError(f"probability must be in [0, 1], got {p}")
