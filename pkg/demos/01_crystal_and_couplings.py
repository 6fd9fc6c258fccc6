"""From trap frequencies to spin-spin couplings.

Three 171Yb+ ions sit in a harmonic trap inside a magnetic field gradient.
The gradient makes every ion's qubit frequency position dependent, and the
shared axial modes turn that into an Ising coupling J_ij.
"""

# %%
import numpy as np

from pseudomolecule import (
    DEFAULT_FIELD,
    YB171,
    TrapConfig,
    axial_normal_modes,
    ion_frequencies,
    j_matrix,
    j_vs_trap_scan,
    loglog_slope,
)

two_pi = 2 * np.pi
trap = TrapConfig(nu_axial=two_pi * 123.5e3, nu_radial=two_pi * 502e3, n_ions=3)
modes = axial_normal_modes(trap, YB171)

print("positions [um]:", np.round(modes.positions * 1e6, 3))
print("mode frequencies / nu_1:", np.round(modes.mode_freqs / trap.nu_axial, 4))
print("mode matrix (rows = modes):\n", np.round(modes.mode_matrix, 4))

# %% The field map: B(z) is not linear because of the transverse bias, so the
# outer ions see slightly different gradients.
freqs = ion_frequencies(modes, DEFAULT_FIELD, YB171)
print("gradients at the ions [T/m]:", np.round(freqs.gradient_at_ion, 3))
print("adjacent qubit splittings [MHz]:", np.round(np.diff(freqs.omega) / two_pi / 1e6, 3))

# %% Couplings from the computed gradients
j = j_matrix(modes, freqs, YB171)
print("J [2pi x Hz]:\n", np.round(j.j_hz, 2))

# %% J falls as 1/nu_1^2 for a uniform gradient
nus = two_pi * np.array([60e3, 100e3, 200e3, 400e3])
scan = j_vs_trap_scan(nus, gradient=19.0, n_ions=2, species=YB171)
for nu, val in zip(nus, scan.pair(0, 1)):
    print(f"nu_1 = 2pi x {nu / two_pi / 1e3:5.0f} kHz   J = 2pi x {val / two_pi:7.2f} Hz")
print("log-log slope:", round(loglog_slope(scan.nu_axial, scan.pair(0, 1)), 6))
