"""Photon-counting readout of two ions with a non-imaging detector.

The detector reports a photon count. Counts are Poisson distributed with a
mean set by the number of bright (``|up>``) ions, and two thresholds sort a
count into 0, 1 or 2 bright ions.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import poisson

from ..rng import make_rng

DEFAULT_DETECTION_RATES = (0.985, 0.889, 0.852)


@dataclass(frozen=True)
class DetectionModel:
    """Poisson means for 0/1/2 bright ions and the two count thresholds.

    A count ``c`` is classified as 0 bright if ``c <= threshold_low``, 1 if
    ``threshold_low < c <= threshold_high`` and 2 otherwise. ``deviation``
    records the calibration residual when the model came from
    :func:`calibrate_detection`.
    """

    lambda_dark: float
    lambda_one: float
    lambda_two: float
    threshold_low: int
    threshold_high: int
    deviation: float = 0.0
    feasible: bool = True

    def __post_init__(self):
        if not 0 <= self.lambda_dark < self.lambda_one < self.lambda_two:
            raise ValueError("need 0 <= lambda_dark < lambda_one < lambda_two")
        if not 0 <= self.threshold_low <= self.threshold_high:
            raise ValueError("need 0 <= threshold_low <= threshold_high")

    @property
    def means(self):
        return np.array([self.lambda_dark, self.lambda_one, self.lambda_two])

    def classification_matrix(self):
        """``C[k, m]`` = P(classified k bright | m truly bright), exact CDFs."""
        cdf_low = poisson.cdf(self.threshold_low, self.means)
        cdf_high = poisson.cdf(self.threshold_high, self.means)
        return np.array([cdf_low, cdf_high - cdf_low, 1.0 - cdf_high])

    def correct_rates(self):
        return np.diag(self.classification_matrix()).copy()

    def classify(self, counts):
        counts = np.asarray(counts)
        return np.where(counts <= self.threshold_low, 0,
                        np.where(counts <= self.threshold_high, 1, 2))

    def to_dict(self):
        return {
            "lambda_dark": self.lambda_dark,
            "lambda_one": self.lambda_one,
            "lambda_two": self.lambda_two,
            "threshold_low": self.threshold_low,
            "threshold_high": self.threshold_high,
            "calibration_deviation": self.deviation,
            "feasible": self.feasible,
        }


def _solve_mean(f, target, hi=500.0):
    # f is monotone decreasing in the mean
    if f(0.0) <= target:
        return 0.0
    return brentq(lambda lam: f(lam) - target, 0.0, hi, xtol=1e-13)


def _one_bright_mean(low, high, target, lam0, lam2):
    """Mean with P(low < N <= high) = target, closest to (lam0+lam2)/2."""
    rate = lambda lam: poisson.cdf(high, lam) - poisson.cdf(low, lam)
    if high == low:
        return None, 1.0
    res = minimize_scalar(lambda lam: -rate(lam), bounds=(lam0, lam2), method="bounded",
                          options={"xatol": 1e-12})
    peak = float(res.x)
    if rate(peak) < target:
        return peak, target - rate(peak)
    roots = []
    if rate(lam0) < target:
        roots.append(brentq(lambda lam: rate(lam) - target, lam0, peak, xtol=1e-13))
    if rate(lam2) < target:
        roots.append(brentq(lambda lam: rate(lam) - target, peak, lam2, xtol=1e-13))
    if not roots:
        return peak, 0.0
    mid = 0.5 * (lam0 + lam2)
    return min(roots, key=lambda r: abs(r - mid)), 0.0


def calibrate_detection(targets=DEFAULT_DETECTION_RATES, max_threshold=40, tolerance=0.005):
    """Deterministic search for a model reproducing the correct-classification rates.

    For every threshold pair the dark and two-ion means are solved exactly
    from their one-sided CDF conditions and the one-ion mean from the window
    condition. Among pairs with the smallest worst-case deviation the one
    whose one-ion mean is closest to additive brightness
    (``lambda_one = (lambda_dark + lambda_two)/2``) wins.
    """
    t0, t1, t2 = (float(t) for t in targets)
    if not all(0 < t < 1 for t in (t0, t1, t2)):
        raise ValueError("target rates must lie in (0, 1)")
    best = None
    for low in range(max_threshold + 1):
        lam0 = _solve_mean(lambda lam: poisson.cdf(low, lam), t0)
        for high in range(low, max_threshold + 1):
            lam2 = _solve_mean(lambda lam: poisson.cdf(high, lam), 1.0 - t2)
            if lam2 <= lam0:
                continue
            lam1, dev1 = _one_bright_mean(low, high, t1, lam0, lam2)
            if lam1 is None or not lam0 < lam1 < lam2:
                continue
            model = DetectionModel(lam0, lam1, lam2, low, high)
            deviation = float(np.max(np.abs(model.correct_rates() - (t0, t1, t2))))
            mismatch = abs(lam1 - 0.5 * (lam0 + lam2)) / lam2
            key = (round(deviation, 9), mismatch, low, high)
            if best is None or key < best[0]:
                best = (key, model, deviation)
    if best is None:
        raise ValueError("no threshold pair admits ordered Poisson means")
    _, model, deviation = best
    feasible = deviation <= tolerance
    if not feasible:
        warnings.warn(f"detection targets not reachable; best deviation {deviation:.4f}")
    return DetectionModel(model.lambda_dark, model.lambda_one, model.lambda_two,
                          model.threshold_low, model.threshold_high, deviation, feasible)


def _bright_count_distribution(pair_probs):
    p = np.asarray(pair_probs, dtype=float).reshape(2, 2)
    return np.array([p[0, 0], p[0, 1] + p[1, 0], p[1, 1]])


def detected_distribution(pair_probs, model):
    """Exact classified outcome distribution for two ions, shape (2, 2).

    Class 0 maps to down-down, class 2 to up-up. Class 1 keeps the true
    single-bright outcome; misclassified even outcomes are split equally
    between up-down and down-up.
    """
    p = np.asarray(pair_probs, dtype=float).reshape(2, 2)
    c = model.classification_matrix()
    out = np.zeros((2, 2))
    n_true = _bright_count_distribution(p)
    out[0, 0] = c[0] @ n_true
    out[1, 1] = c[2] @ n_true
    stray = 0.5 * (c[1, 0] * p[0, 0] + c[1, 2] * p[1, 1])
    out[0, 1] = c[1, 1] * p[0, 1] + stray
    out[1, 0] = c[1, 1] * p[1, 0] + stray
    return out


def single_ion_detected_up(p_up, model):
    """P(reported bright) for one ion next to a dark partner."""
    c = model.classification_matrix()
    return p_up * (1.0 - c[0, 1]) + (1.0 - p_up) * (1.0 - c[0, 0])


def detect(outcomes, model, seed, n_shots=None):
    """Simulate photon counting; returns classified pair-outcome counts (2, 2).

    ``outcomes`` is either a (2, 2) probability table, in which case
    ``n_shots`` true outcomes are sampled first, or an integer array of shape
    ``(shots, 2)`` of already sampled bits (1 = up).
    """
    rng = make_rng(seed)
    arr = np.asarray(outcomes)
    if arr.shape == (2, 2) and n_shots is not None:
        probs = arr.astype(float).ravel()
        idx = rng.choice(4, size=n_shots, p=probs / probs.sum())
        bits = np.column_stack([idx // 2, idx % 2])
    else:
        bits = arr.astype(int).reshape(-1, 2)
    n_bright = bits.sum(axis=1)
    counts = rng.poisson(model.means[n_bright])
    cls = model.classify(counts)
    table = np.zeros((2, 2), dtype=int)
    table[0, 0] = np.sum(cls == 0)
    table[1, 1] = np.sum(cls == 2)
    mid = cls == 1
    # single-bright truth keeps its identity; even truths pick a side at random
    side = np.where(n_bright == 1, bits[:, 0], rng.integers(0, 2, size=len(bits)))
    table[1, 0] = np.sum(mid & (side == 1))
    table[0, 1] = np.sum(mid & (side == 0))
    return table


def parity(pair_probs):
    p = np.asarray(pair_probs, dtype=float).reshape(2, 2)
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])
