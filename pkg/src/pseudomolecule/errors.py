"""Exception types raised by the simulator."""


class PseudomoleculeError(Exception):
    """Base class for all errors raised by this package."""


class SolverError(PseudomoleculeError):
    """An iterative solve did not converge."""


class InstabilityError(PseudomoleculeError):
    """The ion crystal has a non-positive Hessian eigenvalue."""


class FieldSingularityError(PseudomoleculeError):
    """The field magnitude vanishes where a gradient is requested."""


class SequenceError(PseudomoleculeError, ValueError):
    """A pulse sequence or sequence request is malformed."""


class FitError(PseudomoleculeError):
    """A least-squares fit is degenerate."""


class ConfigError(PseudomoleculeError, ValueError):
    """A run configuration is invalid.

    ``field`` names the offending dotted key, e.g. ``"trap.nu_axial"``.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
