"""Physical constants (CODATA 2018), SI units.

Kept as plain literals so results do not drift with the installed scipy.
"""

import math

ELEMENTARY_CHARGE = 1.602176634e-19  # C
EPSILON_0 = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s
PLANCK = 6.62607015e-34  # J s
BOHR_MAGNETON = 9.2740100783e-24  # J/T
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg

TWO_PI = 2.0 * math.pi

# Coulomb coupling e^2 / (4 pi eps0), J m
COULOMB_CONSTANT_E2 = ELEMENTARY_CHARGE**2 / (4.0 * math.pi * EPSILON_0)
