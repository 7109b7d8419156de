"""Dense density-matrix simulation of 1-2 qubit circuits.

States are plain complex ndarrays of shape (d, d) with d = 2**n_qubits.
Qubit 0 is the most significant bit of the basis index, i.e. for two
qubits the basis ordering is |00>, |01>, |10>, |11> with the first bit
belonging to qubit 0. All functions are pure; randomness enters only
through explicitly passed numpy Generators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = ROTATION_KINDS + ("CNOT", "IDENTITY")

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """A single circuit operation.

    kind: one of RX, RY, RZ, CNOT, IDENTITY.
    angle: rotation angle in radians (rotation kinds only, else None).
    targets: qubit indices; one entry for single-qubit kinds, ordered
        (control, target) for CNOT.
    """

    kind: str
    angle: float | None = None
    targets: tuple[int, ...] = (0,)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind in ROTATION_KINDS and self.angle is None:
            raise ValueError(f"{self.kind} gate requires an angle")
        n_targets = 2 if self.kind == "CNOT" else 1
        if len(self.targets) != n_targets:
            raise ValueError(f"{self.kind} expects {n_targets} target(s), got {self.targets}")
        if self.kind == "CNOT" and self.targets[0] == self.targets[1]:
            raise ValueError("CNOT control and target must differ")


def ground_state(n_qubits: int) -> np.ndarray:
    """Density matrix of |0...0><0...0|."""
    if n_qubits not in (1, 2):
        raise ValueError(f"unsupported qubit count {n_qubits}")
    d = 2**n_qubits
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """The 2x2 unitary for a single-qubit rotation."""
    half = angle / 2.0
    c, s = np.cos(half), np.sin(half)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]], dtype=complex)
    if kind == "RX":
        return c * _I2 - 1j * s * _SX
    raise ValueError(f"not a rotation kind: {kind!r}")


def embed_single(op2: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Embed a 2x2 operator on the given qubit into the full space."""
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    if n_qubits == 1:
        return np.array(op2, dtype=complex)
    # qubit 0 is the most significant bit
    return np.kron(op2, _I2) if qubit == 0 else np.kron(_I2, op2)


def _cnot_matrix(control: int, target: int, n_qubits: int) -> np.ndarray:
    d = 2**n_qubits
    u = np.zeros((d, d), dtype=complex)
    for i in range(d):
        bits = [(i >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
        if bits[control]:
            bits[target] ^= 1
        j = 0
        for b in bits:
            j = (j << 1) | b
        u[j, i] = 1.0
    return u


def gate_unitary(g: GateOp, n_qubits: int) -> np.ndarray:
    """Full-space d x d unitary for a gate."""
    for q in g.targets:
        if not 0 <= q < n_qubits:
            raise ValueError(f"gate target {q} invalid for {n_qubits} qubits")
    if g.kind == "IDENTITY":
        return np.eye(2**n_qubits, dtype=complex)
    if g.kind == "CNOT":
        if n_qubits < 2:
            raise ValueError("CNOT requires at least 2 qubits")
        return _cnot_matrix(g.targets[0], g.targets[1], n_qubits)
    return embed_single(rotation_matrix(g.kind, g.angle), g.targets[0], n_qubits)


def apply_unitary(rho: np.ndarray, g: GateOp) -> np.ndarray:
    """rho -> U rho U^dagger."""
    n_qubits = _n_qubits_of(rho)
    u = gate_unitary(g, n_qubits)
    return u @ rho @ u.conj().T


def apply_channel(rho: np.ndarray, channel) -> np.ndarray:
    """rho -> sum_k K_k rho K_k^dagger for a single-qubit Kraus channel.

    The channel's 2x2 operators are embedded on each qubit listed in
    `qubits` and applied sequentially (one full Kraus map per qubit).
    """
    n_qubits = _n_qubits_of(rho)
    out = rho
    for q in channel.qubits:
        acc = np.zeros_like(out)
        for k in channel.operators:
            kf = embed_single(k, q, n_qubits)
            acc += kf @ out @ kf.conj().T
        out = acc
    return out


def expectation_z(rho: np.ndarray, qubit: int) -> float:
    """Tr(rho Z_qubit), clamped into [-1, 1]."""
    n_qubits = _n_qubits_of(rho)
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    d = rho.shape[0]
    signs = np.array([1.0 if ((i >> (n_qubits - 1 - qubit)) & 1) == 0 else -1.0 for i in range(d)])
    val = float(np.real(np.sum(np.diagonal(rho) * signs)))
    return float(np.clip(val, -1.0, 1.0))


def sample_z(rho: np.ndarray, qubit: int, rng: np.random.Generator) -> int:
    """One Z-basis measurement outcome; 0 with probability (1+<Z>)/2.

    Consumes exactly one uniform draw from rng.
    """
    p0 = (1.0 + expectation_z(rho, qubit)) / 2.0
    return 0 if rng.random() < p0 else 1


def assert_valid_density(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-10, psd_tol=-1e-9):
    """Raise if rho is not Hermitian, unit-trace and PSD within tolerance.

    Eigenvalue check is relatively costly; call from tests and debug
    paths only, not per training step.
    """
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"not square: shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise ValueError(f"not Hermitian: max deviation {herm:.3e}")
    tr = abs(np.trace(rho) - 1.0)
    if tr > trace_tol:
        raise ValueError(f"trace deviates from 1 by {tr:.3e}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < psd_tol:
        raise ValueError(f"not PSD: min eigenvalue {lo:.3e}")


def _n_qubits_of(rho: np.ndarray) -> int:
    d = rho.shape[0]
    if rho.ndim != 2 or rho.shape[1] != d or d not in (2, 4):
        raise ValueError(f"expected a 2x2 or 4x4 density matrix, got shape {rho.shape}")
    return 1 if d == 2 else 2
