import numpy as np
import pytest

from pseudomolecule.experiments import (
    DEFAULT_DETECTION_RATES,
    DetectionModel,
    detect,
    detected_distribution,
    parity,
)
from pseudomolecule.experiments.detection import single_ion_detected_up


def test_calibrated_rates(detection_model):
    assert detection_model.correct_rates() == pytest.approx(DEFAULT_DETECTION_RATES, abs=0.005)
    assert detection_model.feasible


def test_calibrated_model_is_frozen(detection_model):
    m = detection_model
    assert (m.threshold_low, m.threshold_high) == (3, 13)
    assert m.means == pytest.approx([0.930, 9.384, 17.895], abs=1e-3)


def test_classification_matrix_column_stochastic(detection_model):
    c = detection_model.classification_matrix()
    assert c.sum(axis=0) == pytest.approx(np.ones(3), abs=1e-15)
    assert np.all(c >= 0)


def test_dark_limit():
    m = DetectionModel(0.0, 5.0, 10.0, 0, 7)
    assert m.correct_rates()[0] == 1.0


def test_model_validation():
    with pytest.raises(ValueError):
        DetectionModel(5.0, 1.0, 10.0, 2, 7)
    with pytest.raises(ValueError):
        DetectionModel(0.5, 5.0, 10.0, 8, 7)


def test_detected_distribution_properties(detection_model):
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = rng.dirichlet(np.ones(4)).reshape(2, 2)
        out = detected_distribution(p, detection_model)
        assert out.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.all(out >= 0)
    c = detection_model.classification_matrix()
    bell = np.array([[0.5, 0], [0, 0.5]])
    out = detected_distribution(bell, detection_model)
    # even truths stay even unless classified as one bright ion
    expected = sum(0.5 * (c[0, m] + c[2, m] - c[1, m]) for m in (0, 2))
    assert parity(out) == pytest.approx(expected, abs=1e-15)


def test_detect_sampling_matches_exact(detection_model):
    p = np.array([[0.4, 0.1], [0.2, 0.3]])
    counts = detect(p, detection_model, seed=1, n_shots=200_000)
    assert counts.sum() == 200_000
    assert counts / 200_000 == pytest.approx(detected_distribution(p, detection_model), abs=0.004)


def test_detect_is_seeded(detection_model):
    bits = np.array([[0, 0], [1, 1], [1, 0]] * 100)
    a = detect(bits, detection_model, seed=5)
    assert np.array_equal(a, detect(bits, detection_model, seed=5))
    assert a.sum() == 300


def test_single_ion_mapping(detection_model):
    c = detection_model.classification_matrix()
    assert single_ion_detected_up(0.0, detection_model) == pytest.approx(1 - c[0, 0])
    assert single_ion_detected_up(1.0, detection_model) == pytest.approx(1 - c[0, 1])
