"""Calibration of the dephasing model against a plain-Ramsey coherence time."""

import math

import numpy as np

from ..spinsim import PulseSequence, Rotation, SpinState, Wait, measure_populations, run_ensemble
from .fitting import fit_sinusoid
from .protocols import default_phis

DEFAULT_T2 = 200e-6


def ramsey_visibility(noise, tau, n_trajectories=2000, seed=0, phis=None):
    """Fringe visibility (peak-to-peak) of a single-ion Ramsey experiment."""
    phis = default_phis(8) if phis is None else phis
    body = PulseSequence((Rotation((0,), math.pi / 2, 0.0), Wait(tau)))
    ens = run_ensemble(SpinState.all_down(1), body, np.zeros((1, 1)), noise, seed,
                       n_trajectories)
    p_up = [
        measure_populations(ens.then(PulseSequence((Rotation((0,), math.pi / 2, phi),)),
                                     np.zeros((1, 1))), [0])[1]
        for phi in phis
    ]
    return 2.0 * fit_sinusoid(phis, p_up).amplitude


def calibrate_noise_sigma(noise, target_t2=DEFAULT_T2, n_trajectories=2000, seed=0,
                          iterations=60):
    """Bisect ``sigma`` so the Ramsey visibility at ``target_t2`` equals 1/e.

    All bisection steps reuse the same trajectory seeds, so the visibility is
    a smooth function of ``sigma``. Returns the recalibrated model.
    """
    goal = math.exp(-1.0)
    # quasi-static estimate sqrt(2)/T2 brackets the answer from below
    lo, hi = 0.0, 20.0 * math.sqrt(2.0) / target_t2
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        v = ramsey_visibility(noise.with_sigma(mid), target_t2, n_trajectories, seed)
        if v > goal:
            lo = mid
        else:
            hi = mid
    return noise.with_sigma(0.5 * (lo + hi))


def coherence_time(noise, n_trajectories=2000, seed=1, taus=None):
    """1/e crossing of the Ramsey visibility, interpolated in log(visibility)."""
    if taus is None:
        taus = np.linspace(20e-6, 600e-6, 30)
    vis = np.array([ramsey_visibility(noise, t, n_trajectories, seed) for t in taus])
    below = np.nonzero(vis < math.exp(-1.0))[0]
    if len(below) == 0 or below[0] == 0:
        raise ValueError("1/e crossing not bracketed by the tau grid")
    k = below[0]
    y0, y1 = np.log(vis[k - 1]), np.log(vis[k])
    return float(taus[k - 1] + (-1.0 - y0) * (taus[k] - taus[k - 1]) / (y1 - y0))
