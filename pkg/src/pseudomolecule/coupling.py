"""Spin-spin coupling mediated by the axial modes in a field gradient."""

from dataclasses import dataclass

import numpy as np

from . import constants as const
from .crystal import TrapConfig, axial_normal_modes
from .field import zeeman_angular_frequency


@dataclass(frozen=True)
class KappaMatrix:
    """Dimensionless coupling ``kappa[n, l]`` of ion l to mode n."""

    kappa: np.ndarray


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric J matrix in rad/s with zero diagonal."""

    j: np.ndarray

    @property
    def j_hz(self):
        """J / 2pi, i.e. the value quoted as ``2pi x ... Hz``."""
        return self.j / const.TWO_PI

    def pair(self, a, b):
        return float(self.j[a, b])


def _gradients(freqs):
    return np.asarray(getattr(freqs, "gradient_at_ion", freqs), dtype=float)


def kappa_matrix(modes, freqs, species):
    """``kappa[n, l] = dz_n * (g_F mu_B b_l / hbar) / nu_n * S[n, l]``.

    ``freqs`` is an :class:`~pseudomolecule.field.IonFrequencies` or an array
    of per-ion gradients in T/m.
    """
    b = _gradients(freqs)
    if b.shape != (modes.n_ions,):
        raise ValueError(f"expected {modes.n_ions} gradients, got shape {b.shape}")
    nu = modes.mode_freqs
    dz = np.sqrt(const.HBAR / (2.0 * species.mass * nu))
    shift = zeeman_angular_frequency(b, species)
    return KappaMatrix((dz / nu)[:, None] * shift[None, :] * modes.mode_matrix)


def j_matrix(modes, freqs, species):
    """``J_ij = sum_n nu_n kappa_ni kappa_nj``, diagonal set to zero."""
    kappa = kappa_matrix(modes, freqs, species).kappa
    j = np.einsum("n,ni,nj->ij", modes.mode_freqs, kappa, kappa)
    j = 0.5 * (j + j.T)
    np.fill_diagonal(j, 0.0)
    return CouplingMatrix(j)


def two_ion_closed_form(gradient, nu_axial, species):
    """J for two ions in a uniform gradient: ``hbar (g mu_B b/hbar)^2 / (6 m nu^2)``."""
    shift = zeeman_angular_frequency(gradient, species)
    return const.HBAR * shift**2 / (6.0 * species.mass * nu_axial**2)


@dataclass(frozen=True)
class TrapScan:
    nu_axial: np.ndarray
    j: np.ndarray  # (len(nu_axial), N, N) in rad/s

    def pair(self, a, b):
        return self.j[:, a, b]


def j_vs_trap_scan(nu_axial_values, gradient, n_ions, species, nu_radial=None):
    """J matrices for a list of axial frequencies at uniform ``gradient``.

    ``nu_radial`` only enters the trap record; the axial modes do not depend
    on it. It defaults to ten times each axial frequency.
    """
    nus = np.asarray(nu_axial_values, dtype=float)
    if nus.size == 0:
        raise ValueError("need at least one axial frequency")
    if np.any(nus <= 0):
        raise ValueError("axial frequencies must be positive")
    out = []
    for nu in nus:
        trap = TrapConfig(nu, nu_radial if nu_radial else 10.0 * nu, n_ions)
        modes = axial_normal_modes(trap, species)
        out.append(j_matrix(modes, np.full(n_ions, float(gradient)), species).j)
    return TrapScan(nu_axial=nus, j=np.array(out))


def loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
