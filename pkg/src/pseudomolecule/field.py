"""Static magnetic field along the chain, per-ion qubit frequencies and the
microwave excitation spectrum.
"""

from dataclasses import dataclass

import numpy as np

from . import constants as const
from .errors import FieldSingularityError


@dataclass(frozen=True)
class FieldParams:
    """Bias field components (T) at the center ion and magnet gradient (T/m).

    ``B(z) = sqrt((b_parallel0 + grad_pm z)^2 + b_perp0^2)``
    """

    b_parallel0: float
    b_perp0: float
    grad_pm: float

    def __post_init__(self):
        if self.grad_pm < 0:
            raise ValueError("grad_pm must be >= 0")
        if self.b_perp0 < 0:
            raise ValueError("b_perp0 must be >= 0")


DEFAULT_FIELD = FieldParams(b_parallel0=3.4e-4, b_perp0=6.2e-5, grad_pm=19.0)


@dataclass(frozen=True)
class IonFrequencies:
    """Qubit resonance (rad/s) and local field gradient (T/m) for each ion."""

    omega: np.ndarray
    gradient_at_ion: np.ndarray


def field_magnitude(z, f):
    z = np.asarray(z, dtype=float)
    return np.hypot(f.b_parallel0 + f.grad_pm * z, f.b_perp0)


def field_gradient(z, f):
    """dB/dz at ``z``; raises :class:`FieldSingularityError` where B = 0."""
    magnitude = field_magnitude(z, f)
    if np.any(magnitude == 0):
        raise FieldSingularityError("field magnitude vanishes, gradient undefined")
    return f.grad_pm * (f.b_parallel0 + f.grad_pm * np.asarray(z, dtype=float)) / magnitude


def zeeman_angular_frequency(b, species):
    """Linear Zeeman shift ``g_F mu_B B / hbar`` of the upper qubit level."""
    return species.g_factor * const.BOHR_MAGNETON * np.asarray(b) / const.HBAR


def ion_frequencies(modes, f, species):
    """Resonance frequencies and gradients at the equilibrium positions.

    ``modes`` may be a :class:`~pseudomolecule.crystal.CrystalModes` or a plain
    array of positions in metres.
    """
    z = np.asarray(getattr(modes, "positions", modes), dtype=float)
    omega = species.hyperfine_splitting + zeeman_angular_frequency(field_magnitude(z, f), species)
    return IonFrequencies(omega=omega, gradient_at_ion=field_gradient(z, f))


def addressing_error(rabi, gradient, spacing, species):
    """Upper bound on off-resonant excitation of a neighbor ion.

    ``rabi**2 / (rabi**2 + delta**2)`` with ``delta = g_F mu_B b d / hbar``.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    delta = zeeman_angular_frequency(gradient * spacing, species)
    if rabi == 0:
        return 0.0
    return rabi**2 / (rabi**2 + delta**2)


def rabi_excitation(rabi, detuning, duration):
    """Two-level RWA excitation probability from the ground state."""
    rabi = np.asarray(rabi, dtype=float)
    detuning = np.asarray(detuning, dtype=float)
    generalized = np.hypot(rabi, detuning)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = (rabi / generalized) ** 2 * np.sin(0.5 * generalized * duration) ** 2
    return np.where(generalized == 0, 0.0, p)


@dataclass(frozen=True)
class Spectrum:
    """``per_ion[k, l]``: excitation of ion l at ``drive[k]``; ``total`` is
    the expected number of bright ions."""

    drive: np.ndarray
    per_ion: np.ndarray

    @property
    def total(self):
        return self.per_ion.sum(axis=1)


def microwave_spectrum(freqs, rabi, pulse_len, drive):
    """Excitation spectrum for a square pulse applied to ions in ``|down>``."""
    if pulse_len <= 0:
        raise ValueError("pulse_len must be positive")
    drive = np.asarray(drive, dtype=float)
    omega = np.asarray(getattr(freqs, "omega", freqs), dtype=float)
    per_ion = rabi_excitation(rabi, drive[:, None] - omega[None, :], pulse_len)
    return Spectrum(drive=drive, per_ion=per_ion)


def spectrum_peaks(spectrum, min_height=0.5):
    """Drive frequencies of local maxima of ``spectrum.total`` above ``min_height``."""
    total = spectrum.total
    inner = (total[1:-1] >= total[:-2]) & (total[1:-1] > total[2:]) & (total[1:-1] > min_height)
    return spectrum.drive[1:-1][inner]
