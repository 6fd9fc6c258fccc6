"""Equilibrium positions and axial normal modes of a linear ion chain.

All solves are done in the dimensionless units of the axial trap: lengths in
units of ``l = (e^2 / (4 pi eps0 m nu_axial^2))**(1/3)`` and frequencies in
units of ``nu_axial``.
"""

from dataclasses import dataclass

import numpy as np

from . import constants as const
from .errors import InstabilityError, SolverError

MAX_NEWTON_ITERATIONS = 200
NEWTON_TOLERANCE = 1e-12


@dataclass(frozen=True)
class IonSpecies:
    """Ion mass (kg), Lande factor and hyperfine splitting (rad/s)."""

    mass: float
    g_factor: float = 1.0
    hyperfine_splitting: float = const.TWO_PI * 12.642812118e9

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")


#: 171Yb+ in the 2S1/2 ground state, g_F = 1 for the F=1, m_F=+1 level.
YB171 = IonSpecies(
    mass=170.936323 * const.ATOMIC_MASS_UNIT,
    g_factor=1.0,
    hyperfine_splitting=const.TWO_PI * 12.642812118e9,
)


@dataclass(frozen=True)
class TrapConfig:
    """Secular trap frequencies in rad/s and the number of ions."""

    nu_axial: float
    nu_radial: float
    n_ions: int

    def __post_init__(self):
        if not self.nu_axial > 0:
            raise ValueError("nu_axial must be positive")
        if not self.nu_radial > 0:
            raise ValueError("nu_radial must be positive")
        if int(self.n_ions) != self.n_ions or self.n_ions < 1:
            raise ValueError("n_ions must be a positive integer")


@dataclass(frozen=True)
class CrystalModes:
    """Axial normal modes.

    ``mode_matrix[n, l]`` is the participation of ion ``l`` in mode ``n``;
    rows are ordered like ``mode_freqs`` (ascending, c.m. mode first).
    """

    positions: np.ndarray
    mode_freqs: np.ndarray
    mode_matrix: np.ndarray

    @property
    def n_ions(self):
        return len(self.positions)

    @property
    def spacings(self):
        return np.diff(self.positions)


def length_scale(nu_axial, mass):
    """Return the characteristic chain length ``(e^2/(4 pi eps0 m nu^2))**(1/3)`` in m."""
    return (const.COULOMB_CONSTANT_E2 / (mass * nu_axial**2)) ** (1.0 / 3.0)


def _coulomb_force(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    # repulsion pushes ion i away from every j: sign(u_i - u_j)/r^2
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def _hessian(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    coupling = 2.0 / np.abs(diff) ** 3
    hess = -coupling
    np.fill_diagonal(hess, 1.0 + coupling.sum(axis=1))
    return hess


def _initial_guess(n):
    spacing = 2.018 / n**0.559
    return spacing * (np.arange(n) - (n - 1) / 2.0)


def dimensionless_equilibrium(n_ions):
    """Solve the force balance for ``n_ions`` ions in trap units.

    Damped Newton iteration from a uniformly spaced start. Raises
    :class:`SolverError` if the residual does not drop below the tolerance
    within the iteration cap.
    """
    if n_ions < 1:
        raise ValueError("n_ions must be >= 1")
    if n_ions == 1:
        return np.zeros(1)

    u = _initial_guess(n_ions)
    force = _coulomb_force(u)
    for _ in range(MAX_NEWTON_ITERATIONS):
        residual = np.max(np.abs(force))
        if residual < NEWTON_TOLERANCE:
            break
        step = np.linalg.solve(_hessian(u), force)
        damping = 1.0
        while damping > 1e-6:
            trial = u - damping * step
            if np.all(np.diff(trial) > 0):
                trial_force = _coulomb_force(trial)
                if np.max(np.abs(trial_force)) < residual:
                    break
            damping *= 0.5
        else:
            raise SolverError("equilibrium line search failed")
        u, force = trial, trial_force
    else:
        raise SolverError(
            f"equilibrium did not converge in {MAX_NEWTON_ITERATIONS} iterations"
        )
    # force antisymmetry so the center of charge is exactly at 0
    return 0.5 * (u - u[::-1])


def equilibrium_positions(trap, species):
    """Equilibrium axial positions in metres, sorted ascending."""
    u = dimensionless_equilibrium(trap.n_ions)
    return u * length_scale(trap.nu_axial, species.mass)


def _fix_signs(vectors):
    # rows: make the largest-magnitude entry positive; near-ties (symmetric
    # chains) resolve to the lowest ion index
    mags = np.abs(vectors)
    idx = np.argmax(mags >= mags.max(axis=1, keepdims=True) * (1 - 1e-9), axis=1)
    signs = np.sign(vectors[np.arange(len(vectors)), idx])
    return vectors * signs[:, None]


def axial_normal_modes(trap, species):
    """Equilibrium positions, axial mode frequencies and mode matrix."""
    u = dimensionless_equilibrium(trap.n_ions)
    eigvals, eigvecs = np.linalg.eigh(_hessian(u))
    if np.any(eigvals <= 0):
        raise InstabilityError(f"non-positive Hessian eigenvalue {eigvals.min():g}")
    order = np.argsort(eigvals)
    eigvals = eigvals[order]
    mode_matrix = _fix_signs(eigvecs[:, order].T)
    return CrystalModes(
        positions=u * length_scale(trap.nu_axial, species.mass),
        mode_freqs=trap.nu_axial * np.sqrt(eigvals),
        mode_matrix=mode_matrix,
    )


def min_spacing(trap, species):
    """Closed-form minimum inter-ion spacing ``l * 2.018 / N**0.559`` in metres."""
    if trap.n_ions < 2:
        raise ValueError("min_spacing needs at least two ions")
    return length_scale(trap.nu_axial, species.mass) * 2.018 / trap.n_ions**0.559


def linear_chain_stable(trap):
    """True if the radial confinement keeps the chain linear.

    Uses the critical anisotropy ``nu_radial/nu_axial > 0.73 N**0.86``.
    """
    if trap.n_ions == 1:
        return True
    return trap.nu_radial / trap.nu_axial > 0.73 * trap.n_ions**0.86
