"""Density-matrix primitive tests against brute-force oracles."""

import numpy as np
import pytest

from hqgan.noise import KrausChannel, amplitude_damping_kraus, dephasing_kraus
from hqgan.qsim import (
    GateOp,
    apply_channel,
    apply_unitary,
    assert_valid_density,
    expectation_z,
    gate_unitary,
    ground_state,
    rotation_matrix,
    sample_z,
)


def random_density(rng, n_qubits=2):
    d = 2**n_qubits
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def embed_full(op2, qubit, n_qubits):
    """Independent embedding used as the oracle (kron with identities)."""
    mats = [np.eye(2, dtype=complex)] * n_qubits
    mats[qubit] = np.asarray(op2, dtype=complex)
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


class TestGroundState:
    def test_entries(self):
        rho = ground_state(2)
        assert rho[0, 0] == 1.0
        assert np.count_nonzero(rho) == 1
        assert abs(np.trace(rho) - 1) < 1e-15

    def test_expectation_plus_one(self):
        assert expectation_z(ground_state(2), 0) == 1.0
        assert expectation_z(ground_state(2), 1) == 1.0

    def test_invariants(self):
        assert_valid_density(ground_state(1))
        assert_valid_density(ground_state(2))

    def test_rejects_bad_count(self):
        with pytest.raises(ValueError):
            ground_state(3)


class TestGateUnitary:
    def test_rotations_unitary(self):
        for kind in ("RX", "RY", "RZ"):
            for angle in np.linspace(-2 * np.pi, 2 * np.pi, 17):
                u = rotation_matrix(kind, angle)
                assert np.abs(u @ u.conj().T - np.eye(2)).max() < 1e-12

    def test_ry_zero_is_identity(self):
        u = gate_unitary(GateOp("RY", 0.0, (0,)), 2)
        assert np.abs(u - np.eye(4)).max() < 1e-15

    def test_ry_pi_flips(self):
        rho = apply_unitary(ground_state(2), GateOp("RY", np.pi, (0,)))
        assert abs(expectation_z(rho, 0) + 1.0) < 1e-12

    def test_cnot_involution(self):
        u = gate_unitary(GateOp("CNOT", None, (0, 1)), 2)
        assert np.abs(u @ u - np.eye(4)).max() < 1e-15

    def test_cnot_truth_table(self):
        u = gate_unitary(GateOp("CNOT", None, (0, 1)), 2)
        # qubit 0 is the most significant bit: |10> -> |11>, |11> -> |10>
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[1, 1] = expected[3, 2] = expected[2, 3] = 1
        assert np.abs(u - expected).max() < 1e-15

    def test_rotation_matrix_forms(self):
        th = 0.7321
        ry = rotation_matrix("RY", th)
        assert np.abs(ry - np.array([[np.cos(th / 2), -np.sin(th / 2)],
                                     [np.sin(th / 2), np.cos(th / 2)]])).max() < 1e-15
        rz = rotation_matrix("RZ", th)
        assert np.abs(rz - np.diag([np.exp(-1j * th / 2), np.exp(1j * th / 2)])).max() < 1e-15
        rx = rotation_matrix("RX", th)
        sx = np.array([[0, 1], [1, 0]])
        assert np.abs(rx - (np.cos(th / 2) * np.eye(2) - 1j * np.sin(th / 2) * sx)).max() < 1e-15

    def test_bad_targets(self):
        with pytest.raises(ValueError):
            gate_unitary(GateOp("RY", 1.0, (2,)), 2)
        with pytest.raises(ValueError):
            GateOp("CNOT", None, (0, 0))
        with pytest.raises(ValueError):
            GateOp("RY", None, (0,))
        with pytest.raises(ValueError):
            GateOp("HADAMARD", None, (0,))


class TestApplyUnitary:
    def test_identity_no_op(self):
        rng = np.random.default_rng(1)
        rho = random_density(rng)
        out = apply_unitary(rho, GateOp("IDENTITY", None, (0,)))
        assert np.abs(out - rho).max() < 1e-15

    def test_trace_preserved(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            rho = random_density(rng)
            g = GateOp("RY", rng.uniform(-np.pi, np.pi), (int(rng.integers(2)),))
            assert abs(np.trace(apply_unitary(rho, g)) - 1) < 1e-12

    def test_ry_half_pi_splits_population(self):
        rho = apply_unitary(ground_state(2), GateOp("RY", np.pi / 2, (0,)))
        # marginal of qubit 0: diag entries (0.5, 0.5) by direct 2x2 product
        p0 = np.real(rho[0, 0] + rho[1, 1])
        p1 = np.real(rho[2, 2] + rho[3, 3])
        assert abs(p0 - 0.5) < 1e-12 and abs(p1 - 0.5) < 1e-12


class TestApplyChannel:
    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(3)
        channels = [
            amplitude_damping_kraus(0.17),
            dephasing_kraus(0.23),
        ]
        for _ in range(100):
            rho = random_density(rng)
            ch = channels[int(rng.integers(len(channels)))].on(int(rng.integers(2)))
            out = apply_channel(rho, ch)
            oracle = np.zeros_like(rho)
            for k in ch.operators:
                kf = embed_full(k, ch.qubits[0], 2)
                oracle += kf @ rho @ kf.conj().T
            assert np.abs(out - oracle).max() < 1e-12

    def test_damping_on_excited_state(self):
        p = 0.37
        rho = np.zeros((2, 2), dtype=complex)
        rho[1, 1] = 1.0
        out = apply_channel(rho, amplitude_damping_kraus(p))
        assert abs(out[0, 0] - p) < 1e-15
        assert abs(out[1, 1] - (1 - p)) < 1e-15

    def test_dephasing_scales_coherence(self):
        p = 0.2
        rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        out = apply_channel(rho, dephasing_kraus(p))
        assert abs(out[0, 1] - 0.5 * (1 - p)) < 1e-15
        assert abs(out[0, 0] - 0.5) < 1e-15 and abs(out[1, 1] - 0.5) < 1e-15

    def test_identity_channel(self):
        rng = np.random.default_rng(4)
        rho = random_density(rng)
        ch = KrausChannel((np.eye(2, dtype=complex),), "identity", (1,))
        assert np.abs(apply_channel(rho, ch) - rho).max() < 1e-15

    def test_two_qubit_action_is_per_qubit_composition(self):
        rng = np.random.default_rng(5)
        rho = random_density(rng)
        ch = amplitude_damping_kraus(0.11)
        both = apply_channel(rho, ch.on(0, 1))
        seq = apply_channel(apply_channel(rho, ch.on(0)), ch.on(1))
        assert np.abs(both - seq).max() < 1e-14


class TestExpectationZ:
    def test_maximally_mixed(self):
        assert abs(expectation_z(np.eye(4, dtype=complex) / 4, 0)) < 1e-15

    def test_after_half_pi_rotation(self):
        rho = apply_unitary(ground_state(2), GateOp("RY", np.pi / 2, (0,)))
        assert abs(expectation_z(rho, 0)) < 1e-12

    def test_cosine_law(self):
        for th in np.linspace(0, 2 * np.pi, 100):
            rho = apply_unitary(ground_state(2), GateOp("RY", th, (0,)))
            assert abs(expectation_z(rho, 0) - np.cos(th)) < 1e-12

    def test_qubit_index_out_of_range(self):
        with pytest.raises(ValueError):
            expectation_z(ground_state(2), 2)


class TestSampleZ:
    def test_ground_always_zero(self):
        rng = np.random.default_rng(6)
        rho = ground_state(2)
        assert all(sample_z(rho, 0, rng) == 0 for _ in range(100))

    def test_mixed_state_frequency(self):
        rng = np.random.default_rng(7)
        rho = np.eye(4, dtype=complex) / 4
        n = 100_000
        zeros = sum(1 - sample_z(rho, 0, rng) for _ in range(n))
        assert abs(zeros / n - 0.5) < 0.01

    def test_consumes_exactly_one_draw(self):
        a = np.random.default_rng(8)
        b = np.random.default_rng(8)
        rho = np.eye(4, dtype=complex) / 4
        sample_z(rho, 0, a)
        b.random()
        assert a.random() == b.random()

    def test_empirical_mean_tracks_expectation(self):
        rng = np.random.default_rng(9)
        rho = apply_unitary(ground_state(2), GateOp("RY", 1.1, (0,)))
        e = expectation_z(rho, 0)
        n = 100_000
        mean = np.mean([1 - 2 * sample_z(rho, 0, rng) for _ in range(n)])
        assert abs(mean - e) <= 4 / np.sqrt(n)


class TestAccumulatedInvariants:
    def test_random_circuits_stay_valid(self):
        rng = np.random.default_rng(10)
        ch = amplitude_damping_kraus(0.05)
        for _ in range(30):
            rho = ground_state(2)
            for _ in range(12):
                pick = rng.integers(3)
                if pick == 0:
                    rho = apply_unitary(
                        rho, GateOp("RY", rng.uniform(-np.pi, np.pi), (int(rng.integers(2)),))
                    )
                elif pick == 1:
                    rho = apply_unitary(rho, GateOp("CNOT", None, (0, 1)))
                else:
                    rho = apply_channel(rho, ch.on(int(rng.integers(2))))
            assert abs(np.trace(rho) - 1) < 1e-9
            assert np.abs(rho - rho.conj().T).max() < 1e-9
            assert_valid_density(rho)
