"""Closed-form least-squares sinusoid fits for Ramsey and parity fringes."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FitError


@dataclass(frozen=True)
class FringeFit:
    """``offset + amplitude * cos(2 pi phi / period - phase)``."""

    amplitude: float
    phase: float
    offset: float
    rms_residual: float
    period: float = 2 * math.pi

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.offset + self.amplitude * np.cos(2 * np.pi * phi / self.period - self.phase)


def wrap_phase(x):
    """Wrap to ``(-pi, pi]``."""
    y = math.remainder(float(x), 2 * math.pi)
    return math.pi if y == -math.pi else y


def fit_sinusoid(phi, values, period=2 * math.pi):
    """Fit offset, amplitude and phase; the model is linear in
    ``(offset, a cos, a sin)`` so the solve is a single lstsq call."""
    phi = np.asarray(phi, dtype=float)
    values = np.asarray(values, dtype=float)
    if phi.shape != values.shape or phi.ndim != 1:
        raise FitError("phi and values must be 1-d arrays of equal length")
    if len(phi) < 4:
        raise FitError("need at least 4 samples")
    arg = 2 * np.pi * phi / period
    design = np.column_stack([np.ones_like(arg), np.cos(arg), np.sin(arg)])
    if np.linalg.matrix_rank(design) < 3:
        raise FitError("samples do not constrain a sinusoid (degenerate design matrix)")
    (offset, ac, as_), *_ = np.linalg.lstsq(design, values, rcond=None)
    amplitude = math.hypot(ac, as_)
    phase = wrap_phase(math.atan2(as_, ac)) if amplitude > 0 else 0.0
    resid = values - design @ np.array([offset, ac, as_])
    return FringeFit(
        amplitude=amplitude,
        phase=phase,
        offset=float(offset),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        period=period,
    )
