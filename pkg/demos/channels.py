"""Tour of the noise model: device-derived probabilities, Kraus channel
actions on concrete states, and the noisy-identity slot schedule.

Run:  python demos/channels.py
"""

import numpy as np

from hqgan.noise import (
    NoiseParams,
    amplitude_damping_kraus,
    check_completeness,
    combined_kraus,
    damping_probability,
    dephasing_kraus,
    dephasing_probability,
    noisy_slot_count,
    per_slot_channel,
    slot_probabilities,
)
from hqgan.qsim import GateOp, apply_channel, apply_unitary, expectation_z, ground_state

# ---------------------------------------------------------------------------
# 1. Channel probabilities from device times
#
# A 50 ns single-qubit gate on a qubit with T1 = 15 us and T2 = 18 us
# accumulates a little under half a percent of combined decay error.
# ---------------------------------------------------------------------------

params = NoiseParams(enabled=frozenset({"damping", "dephasing"}))
print("device times: T1 = %.0f us, T2 = %.0f us" % (params.T1 * 1e6, params.T2 * 1e6))
print("gate times:   %.0f ns (1q), %.0f ns (2q)" % (params.t1 * 1e9, params.t2 * 1e9))

p_damp = damping_probability(params.t1, params.T1)
p_deph = dephasing_probability(params.t1, params.T1, params.T2)
print("per-slot damping probability:   %.6f" % p_damp)
print("per-slot dephasing probability: %.6f" % p_deph)
assert (p_damp, p_deph) == slot_probabilities(params)

# ---------------------------------------------------------------------------
# 2. What each channel does to a superposition state
#
# Start from |+> = (|0> + |1>)/sqrt(2): equal populations, maximal
# coherence. Damping moves population toward |0>; dephasing leaves the
# populations alone and shrinks the off-diagonal element.
# ---------------------------------------------------------------------------

plus = np.full((2, 2), 0.5, dtype=complex)

heavy_damp = amplitude_damping_kraus(0.3)
after = apply_channel(plus, heavy_damp)
print("\ndamping p=0.3 on |+><+|:")
print("  populations: %.3f / %.3f   (was 0.500 / 0.500)"
      % (after[0, 0].real, after[1, 1].real))
print("  coherence:   %.3f          (was 0.500, sqrt(1-p) = %.3f)"
      % (after[0, 1].real, np.sqrt(0.7)))

heavy_deph = dephasing_kraus(0.3)
after = apply_channel(plus, heavy_deph)
print("dephasing p=0.3 on |+><+|:")
print("  populations: %.3f / %.3f   (unchanged)" % (after[0, 0].real, after[1, 1].real))
print("  coherence:   %.3f          (scaled by 1-p)" % after[0, 1].real)

# ---------------------------------------------------------------------------
# 3. The combined channel is dephasing followed by damping
# ---------------------------------------------------------------------------

both = combined_kraus(amplitude_damping_kraus(0.3), dephasing_kraus(0.3))
check_completeness(both)
a = apply_channel(plus, both)
b = apply_channel(apply_channel(plus, dephasing_kraus(0.3)), amplitude_damping_kraus(0.3))
print("\ncombined channel has %d Kraus operators;" % len(both.operators),
      "max deviation from sequential application: %.2e" % np.abs(a - b).max())

# ---------------------------------------------------------------------------
# 4. The slot schedule: noise scales with gate duration
#
# Every gate is followed by noisy identity slots, one per 50 ns of gate
# time, so the 400 ns CNOT carries 8 slots on each of its qubits.
# ---------------------------------------------------------------------------

ry = GateOp("RY", 0.7, (0,))
cnot = GateOp("CNOT", None, (0, 1))
print("\nslots after RY:   %d" % noisy_slot_count(ry, params))
print("slots after CNOT: %d" % noisy_slot_count(cnot, params))

# Apply one RY(pi/2) + its slot to both qubits of the ground state and
# watch the expectation drift slightly off the noiseless value.
rho = apply_unitary(ground_state(2), GateOp("RY", np.pi / 2, (0,)))
slot = per_slot_channel(params)
rho_noisy = apply_channel(rho, slot.on(0))
print("\n<Z0> after RY(pi/2):        % .6f (noiseless 0)" % expectation_z(rho, 0))
print("<Z0> after RY(pi/2) + slot: % .6f" % expectation_z(rho_noisy, 0))

# ---------------------------------------------------------------------------
# 5. Overrides for the high-noise studies
# ---------------------------------------------------------------------------

strong = NoiseParams(override_p_deph=0.09, enabled=frozenset({"dephasing"}))
print("\noverride study channel: %s" % per_slot_channel(strong).label)
