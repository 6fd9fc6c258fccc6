"""Collective Ornstein-Uhlenbeck detuning noise."""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.signal import lfilter

from ..rng import make_rng


@dataclass(frozen=True)
class NoiseModel:
    """Stationary OU detuning shared by all ions.

    ``sigma`` is the stationary standard deviation in rad/s, ``tau_c`` the
    correlation time and ``dt`` the sampling step (both seconds). ``weights``
    scales the detuning per ion; ``None`` means weight 1 on every ion.
    """

    kind: str = "ornstein_uhlenbeck"
    sigma: float = 0.0
    tau_c: float = 1e-3
    dt: float = 5e-6
    weights: tuple = field(default=None)

    def __post_init__(self):
        if self.kind not in ("none", "ornstein_uhlenbeck"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not self.tau_c > 0 or not self.dt > 0:
            raise ValueError("tau_c and dt must be positive")
        if self.dt > self.tau_c / 10 * (1 + 1e-12):
            raise ValueError("dt must not exceed tau_c / 10")

    @property
    def active(self):
        return self.kind != "none" and self.sigma > 0

    def ion_weights(self, n):
        if self.weights is None:
            return np.ones(n)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (n,):
            raise ValueError(f"expected {n} noise weights")
        return w

    def with_sigma(self, sigma):
        return NoiseModel(self.kind, sigma, self.tau_c, self.dt, self.weights)


NO_NOISE = NoiseModel(kind="none")


@dataclass(frozen=True)
class NoiseTrajectory:
    """Detuning samples ``values[..., k]`` at ``t = k * dt`` (rad/s).

    Leading axes index independent trajectories.
    """

    dt: float
    values: np.ndarray
    seed: object = None

    @property
    def duration(self):
        return (self.values.shape[-1] - 1) * self.dt

    def phase_integral(self, t0, t1):
        """Trapezoidal integral of the detuning over ``[t0, t1]`` (radians).

        The record is treated as piecewise linear, so the integral over a
        partial step is exact for the interpolant. ``t0``/``t1`` may be arrays;
        the result has shape ``values.shape[:-1] + shape(t0)``.
        """
        return self._cumulative(t1) - self._cumulative(t0)

    @cached_property
    def _grid_integral(self):
        x = self.values
        steps = 0.5 * self.dt * (x[..., 1:] + x[..., :-1])
        return np.concatenate([np.zeros(x.shape[:-1] + (1,)), np.cumsum(steps, axis=-1)], axis=-1)

    def _cumulative(self, t):
        x = self.values
        dt = self.dt
        cum = self._grid_integral
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-15) or np.any(t > self.duration + 1e-12):
            raise ValueError("integration bounds outside the sampled record")
        k = np.clip(np.floor(t / dt).astype(int), 0, x.shape[-1] - 2)
        s = t - k * dt
        xk = x[..., k]
        slope = (x[..., k + 1] - xk) / dt
        return cum[..., k] + xk * s + 0.5 * slope * s**2


def _n_samples(model, duration):
    return max(int(math.ceil(duration / model.dt - 1e-9)), 1) + 1


def _ou_from_normals(model, normals):
    a = math.exp(-model.dt / model.tau_c)
    scale = model.sigma * math.sqrt(-math.expm1(-2 * model.dt / model.tau_c))
    x0 = model.sigma * normals[..., :1]
    drive = scale * normals[..., 1:]
    rest = lfilter([1.0], [1.0, -a], drive, axis=-1, zi=a * x0)[0]
    return np.concatenate([x0, rest], axis=-1)


def sample_noise_trajectory(model, duration, seed):
    """One OU realization covering ``[0, duration]``.

    Exact discretization ``x_{k+1} = a x_k + sigma sqrt(1 - a^2) xi_k`` with
    a stationary initial draw.
    """
    k = _n_samples(model, duration)
    if not model.active:
        return NoiseTrajectory(model.dt, np.zeros(k), seed)
    normals = make_rng(seed).standard_normal(k)
    return NoiseTrajectory(model.dt, _ou_from_normals(model, normals), seed)


def sample_noise_batch(model, duration, seed, n_trajectories):
    """``n_trajectories`` independent realizations, row ``i`` seeded by ``(seed, i)``."""
    k = _n_samples(model, duration)
    if not model.active:
        return NoiseTrajectory(model.dt, np.zeros((n_trajectories, k)), seed)
    normals = np.empty((n_trajectories, k))
    for i in range(n_trajectories):
        normals[i] = make_rng(seed, i).standard_normal(k)
    return NoiseTrajectory(model.dt, _ou_from_normals(model, normals), seed)
