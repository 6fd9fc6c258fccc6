import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pseudomolecule import YB171, DEFAULT_FIELD, TrapConfig, axial_normal_modes, ion_frequencies
from pseudomolecule.config import load_config
from pseudomolecule.coupling import j_matrix
from pseudomolecule.experiments import calibrate_detection

TWO_PI = 2 * math.pi
REF_TRAP = TrapConfig(TWO_PI * 123.5e3, TWO_PI * 502e3, 3)
CAPTION_GRADIENTS = np.array([16.8, 18.7, 18.9])


@pytest.fixture(scope="session")
def ref_modes():
    return axial_normal_modes(REF_TRAP, YB171)


@pytest.fixture(scope="session")
def ref_freqs(ref_modes):
    return ion_frequencies(ref_modes, DEFAULT_FIELD, YB171)


@pytest.fixture(scope="session")
def ref_j(ref_modes):
    """Coupling matrix (rad/s) for the caption gradients."""
    return j_matrix(ref_modes, CAPTION_GRADIENTS, YB171).j


@pytest.fixture(scope="session")
def detection_model():
    return calibrate_detection()


@pytest.fixture(scope="session")
def default_config():
    return load_config()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.LINES:
        terminalreporter.write_line(line)
