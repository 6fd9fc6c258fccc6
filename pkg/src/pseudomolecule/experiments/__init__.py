"""End-to-end measurement protocols and readout models."""

from .detection import (
    DEFAULT_DETECTION_RATES,
    DetectionModel,
    calibrate_detection,
    detect,
    detected_distribution,
    parity,
)
from .fitting import FringeFit, fit_sinusoid, wrap_phase
from .protocols import (
    CnotResult,
    JMeasurement,
    ParityResult,
    Setup,
    bell_fidelity,
    cnot_truth_table,
    default_tau,
    measure_j,
    parity_scan,
)
from .calibration import DEFAULT_T2, calibrate_noise_sigma, coherence_time, ramsey_visibility
