"""Simulation of a trapped-ion "pseudo-molecule": a linear ion chain in a
static magnetic-field gradient, its spin-spin couplings, and the microwave
experiments that measure them.
"""

__version__ = "0.1.0"

from .constants import HBAR, BOHR_MAGNETON, TWO_PI
from .errors import (
    ConfigError,
    FieldSingularityError,
    FitError,
    InstabilityError,
    PseudomoleculeError,
    SequenceError,
    SolverError,
)
from .crystal import (
    YB171,
    CrystalModes,
    IonSpecies,
    TrapConfig,
    axial_normal_modes,
    equilibrium_positions,
    length_scale,
    linear_chain_stable,
    min_spacing,
)
from .field import (
    DEFAULT_FIELD,
    FieldParams,
    IonFrequencies,
    addressing_error,
    field_gradient,
    field_magnitude,
    ion_frequencies,
    microwave_spectrum,
    spectrum_peaks,
    zeeman_angular_frequency,
)
from .coupling import (
    CouplingMatrix,
    KappaMatrix,
    j_matrix,
    j_vs_trap_scan,
    kappa_matrix,
    loglog_slope,
    two_ion_closed_form,
)
from .rng import derive_seed, make_rng
