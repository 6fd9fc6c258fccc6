"""Why the measured Bell fidelity is only about 0.57.

Two things eat into the ideal result. Ambient field noise dephases the
qubits during the 11 ms gate, and photon-counting readout confuses one
bright ion with zero or two.
"""

# %%
import math

import numpy as np

from pseudomolecule.config import load_config
from pseudomolecule import axial_normal_modes, ion_frequencies, j_matrix
from pseudomolecule.experiments import Setup, calibrate_detection, parity_scan
from pseudomolecule.experiments.calibration import coherence_time

cfg = load_config()
modes = axial_normal_modes(cfg.trap, cfg.species)
j = j_matrix(modes, ion_frequencies(modes, cfg.field, cfg.species), cfg.species).j

# %% The shipped noise model reproduces a 200 us Ramsey coherence time
print(f"sigma = 2pi x {cfg.noise.sigma / (2 * math.pi):.1f} Hz, tau_c = {cfg.noise.tau_c * 1e3} ms")
print(f"plain Ramsey 1/e time: {coherence_time(cfg.noise, 2000) * 1e6:.1f} us")

# %% Readout: three Poisson distributions and two thresholds
det = calibrate_detection(cfg.detection_targets)
print("Poisson means:", np.round(det.means, 3), "thresholds:", det.threshold_low, det.threshold_high)
print("classification matrix C[k, m] = P(k bright | m bright):\n",
      np.round(det.classification_matrix(), 4))

# %% Switch the imperfections on one at a time
tau = 11e-3
for label, setup in [
    ("ideal", Setup(j)),
    ("detection only", Setup(j, detection=det)),
    ("noise only", Setup(j, cfg.noise, n_trajectories=cfg.n_trajectories)),
    ("noise + detection", Setup(j, cfg.noise, detection=det, n_trajectories=cfg.n_trajectories)),
]:
    r = parity_scan(setup, 0, 2, tau)
    print(f"{label:>18}: Pi_z {r.pi_z:.3f}  V {r.visibility:.3f}  F {r.fidelity:.3f}")

# %% With 50 shots per point the estimate scatters around the exact value
for seed in range(4):
    r = parity_scan(Setup(j, cfg.noise, detection=det, n_trajectories=cfg.n_trajectories),
                    0, 2, tau, n_repeats=50, seed=seed)
    print(f"seed {seed}: F = {r.fidelity:.3f}  entangled: {r.entangled}")
