"""N-qubit state-vector engine for microwave pulse sequences."""

from .noise import (
    NO_NOISE,
    NoiseModel,
    NoiseTrajectory,
    sample_noise_batch,
    sample_noise_trajectory,
)
from .sequence import (
    CNOT_PHASE,
    DEFAULT_RABI,
    ECHO_PATTERNS,
    Ensemble,
    PulseSequence,
    Rotation,
    Wait,
    build_cnot,
    build_echo_ramsey,
    echo_block,
    run_ensemble,
    run_sequence,
)
from .state import (
    CrosstalkModel,
    SpinState,
    apply_rotation,
    apply_rotation_with_crosstalk,
    detuned_rotation_matrix,
    evolve_free,
    measure_populations,
    rotation_matrix,
)
