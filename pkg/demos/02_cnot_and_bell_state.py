"""A CNOT between the outer ions and the Bell state it makes.

The gate is nothing more than a Ramsey experiment on the target with 84
echo pulses on both ions, timed so the coupling accumulates a conditional
phase of pi.
"""

# %%
import math

import numpy as np

from pseudomolecule import DEFAULT_FIELD, YB171, TrapConfig, axial_normal_modes, ion_frequencies, j_matrix
from pseudomolecule.experiments import Setup, cnot_truth_table, measure_j, parity_scan

two_pi = 2 * math.pi
modes = axial_normal_modes(TrapConfig(two_pi * 123.5e3, two_pi * 502e3, 3), YB171)
j = j_matrix(modes, ion_frequencies(modes, DEFAULT_FIELD, YB171), YB171).j
setup = Setup(j)

# %% Measure J_13 the way the experiment does: compare two Ramsey fringes
tau = math.pi / (4 * j[0, 2])
res = measure_j(setup, 0, 2, tau)
print(f"J_13 measured {res.j_estimate_hz:.3f} Hz, computed {j[0, 2] / two_pi:.3f} Hz")

# %% Truth table at tau = pi / (2 J_13)
gate_tau = math.pi / (2 * j[0, 2])
cnot = cnot_truth_table(setup, 0, 2, gate_tau)
labels = ["dd", "ud", "du", "uu"]
print("input -> output probabilities (control, target)")
for name, row in zip(labels, cnot.truth_table):
    print(f"  {name}: " + "  ".join(f"{lab}={p:.3f}" for lab, p in zip(labels, row)))
print("fringe phase shifts [rad]:", {k: round(v, 4) for k, v in cnot.phase_shift.items()})

# %% Control in a superposition turns the CNOT into an entangler
bell = parity_scan(setup, 0, 2, gate_tau)
print(f"Pi_z = {bell.pi_z:.4f}  V = {bell.visibility:.4f}  F = {bell.fidelity:.4f}")
print("parity samples:", np.round(bell.parity[:6], 3), "...")
