"""Measurement protocols: Ramsey J measurement, CNOT truth tables and the
parity scan used to certify entanglement.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..rng import derive_seed, make_rng
from ..spinsim import (
    DEFAULT_RABI,
    NO_NOISE,
    PulseSequence,
    Rotation,
    SpinState,
    build_cnot,
    build_echo_ramsey,
    measure_populations,
    run_ensemble,
)
from .detection import detect, detected_distribution, parity, single_ion_detected_up
from .fitting import fit_sinusoid, wrap_phase

DEFAULT_REPEATS = 50
WRAP_MARGIN = 0.1


@dataclass(frozen=True)
class Setup:
    """Everything an experiment needs besides its own protocol parameters.

    ``j`` is the coupling matrix in rad/s. Noise trajectories are averaged
    into outcome probabilities before any shot sampling.
    """

    j: np.ndarray
    noise: object = NO_NOISE
    crosstalk: object = None
    detection: object = None
    n_trajectories: int = 500
    rabi: float = DEFAULT_RABI

    def __post_init__(self):
        object.__setattr__(self, "j", np.asarray(getattr(self.j, "j", self.j), dtype=float))

    @property
    def n_ions(self):
        return self.j.shape[0]

    @property
    def noisy(self):
        return self.noise is not None and self.noise.active

    def ideal(self):
        return Setup(self.j, NO_NOISE, None, None, 1, self.rabi)

    def ensemble(self, seq, seed):
        n_traj = self.n_trajectories if self.noisy else 1
        return run_ensemble(SpinState.all_down(self.n_ions), seq, self.j, self.noise,
                            seed, n_traj, self.crosstalk)


def _phase_scan(setup, body, target, phis, seed):
    """Target-up probability after ``body`` + pi/2(phi) on ``target``."""
    ens = setup.ensemble(body, seed)
    out = np.empty(len(phis))
    for k, phi in enumerate(phis):
        final = PulseSequence((Rotation((target,), math.pi / 2, float(phi), setup.rabi),))
        out[k] = measure_populations(ens.then(final, setup.j, setup.crosstalk), [target])[1]
    return out


def _observe_single(setup, p_up, n_repeats, rng):
    if setup.detection is not None:
        p_up = single_ion_detected_up(p_up, setup.detection)
    if n_repeats is None:
        return np.asarray(p_up, dtype=float)
    return rng.binomial(n_repeats, np.clip(p_up, 0.0, 1.0)) / n_repeats


def _split_final(seq):
    return PulseSequence(seq.steps[:-1])


def default_phis(n=16):
    return np.linspace(0.0, 2 * math.pi, n, endpoint=False)


@dataclass(frozen=True)
class JMeasurement:
    j_estimate: float
    delta_phi: float
    fit_down: object
    fit_up: object
    tau: float
    phis: np.ndarray
    p_down: np.ndarray
    p_up: np.ndarray
    ambiguous: bool
    seed: object = None

    @property
    def j_estimate_hz(self):
        return self.j_estimate / (2 * math.pi)


def measure_j(setup, i, j, tau, n_echo=4, pattern="xy4", phis=None, n_repeats=None,
              seed=0, echo_on="both"):
    """Estimate ``J_ij`` from the phase shift of the ion-j Ramsey fringe.

    Two runs with ion ``i`` left in ``|down>`` or flipped to ``|up>``. Each
    echo pulse mirrors the fringe phase, so the difference is sign-corrected
    by ``(-1)**n_echo`` before forming ``delta_phi / (2 tau)``. The control-up
    fringe moves to lower phase for positive J; ``delta_phi`` is oriented so
    that positive J gives positive ``delta_phi``.
    ``n_repeats=None`` uses exact (trajectory-averaged) probabilities.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    phis = default_phis() if phis is None else np.asarray(phis, dtype=float)
    rng = make_rng(seed, 1)
    curves = []
    for k, prep in enumerate(("down", "up")):
        seq = build_echo_ramsey(i, j, tau, n_echo, pattern, 0.0, control_prep=prep,
                                echo_on=echo_on, rabi=setup.rabi)
        p = _phase_scan(setup, _split_final(seq), j, phis, derive_seed(seed, 2, k))
        curves.append(_observe_single(setup, p, n_repeats, rng))
    fit_down = fit_sinusoid(phis, curves[0])
    fit_up = fit_sinusoid(phis, curves[1])
    delta = wrap_phase((-1) ** n_echo * (fit_down.phase - fit_up.phase))
    return JMeasurement(
        j_estimate=delta / (2 * tau),
        delta_phi=delta,
        fit_down=fit_down,
        fit_up=fit_up,
        tau=tau,
        phis=phis,
        p_down=curves[0],
        p_up=curves[1],
        ambiguous=abs(delta) > math.pi - WRAP_MARGIN,
        seed=seed,
    )


def default_tau(j_value):
    """Evolution time giving ``2 J tau = pi/2``."""
    return math.pi / (4 * abs(j_value))


PREPARATIONS = (("down", "down"), ("up", "down"), ("down", "up"), ("up", "up"))


@dataclass(frozen=True)
class CnotResult:
    """Target-up fringes per input ``(control, target)`` preparation.

    ``truth_table[a, b]``: probability of output ``b`` for input ``a``, with
    inputs and outputs in the order of :data:`PREPARATIONS` as
    ``|control target>`` bits (down-down, up-down, down-up, up-up).
    """

    phis: np.ndarray
    curves: dict
    fits: dict
    phase_shift: dict
    truth_table: np.ndarray
    tau: float
    seed: object = None

    @property
    def contrast(self):
        """Mean fitted peak-to-peak contrast over the four fringes."""
        return float(np.mean([2 * f.amplitude for f in self.fits.values()]))


def _bits(prep):
    return tuple(1 if p == "up" else 0 for p in prep)


def cnot_truth_table(setup, control, target, tau, phis=None, n_echo=84, pattern="xy4",
                     n_repeats=None, seed=0):
    """Scan the final target phase for all four basis inputs.

    The truth table is evaluated at ``phi = 3 pi/2`` from the
    trajectory-averaged two-ion populations (detection errors applied when a
    model is configured). ``phase_shift[target_prep]`` is the wrapped fitted
    phase difference between the control-up and control-down fringes.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    phis = default_phis() if phis is None else np.asarray(phis, dtype=float)
    rng = make_rng(seed, 1)
    curves, fits = {}, {}
    table = np.zeros((4, 4))
    order = [_bits(p) for p in PREPARATIONS]
    for k, prep in enumerate(PREPARATIONS):
        seq = build_cnot(control, target, tau, n_echo, pattern, control_prep=prep[0],
                         target_prep=prep[1], rabi=setup.rabi)
        body = _split_final(seq)
        sub_seed = derive_seed(seed, 2, k)
        p = _phase_scan(setup, body, target, phis, sub_seed)
        curves[prep] = _observe_single(setup, p, n_repeats, rng)
        fits[prep] = fit_sinusoid(phis, curves[prep])

        ens = setup.ensemble(seq, sub_seed)
        pair = measure_populations(ens, [control, target])
        if setup.detection is not None:
            pair = detected_distribution(pair, setup.detection)
        table[k] = [pair[b] for b in order]
    shifts = {
        t: wrap_phase(fits[("up", t)].phase - fits[("down", t)].phase) for t in ("down", "up")
    }
    return CnotResult(phis, curves, fits, shifts, table, tau, seed)


@dataclass(frozen=True)
class ParityResult:
    pi_z: float
    visibility: float
    fidelity: float
    phis: np.ndarray
    parity: np.ndarray
    fit: object = None
    seed: object = None
    metadata: dict = field(default_factory=dict)

    @property
    def samples(self):
        return np.column_stack([self.phis, self.parity])

    @property
    def entangled(self):
        return self.fidelity > 0.5


def bell_fidelity(pi_z, visibility):
    """``F = (pi_z + 1)/4 + V/2``; entangled iff ``F > 0.5``."""
    f = (pi_z + 1) / 4 + visibility / 2
    return f, f > 0.5


def _observe_pair(setup, pair, n_repeats, seed):
    if n_repeats is None:
        if setup.detection is not None:
            pair = detected_distribution(pair, setup.detection)
        return parity(pair)
    if setup.detection is not None:
        counts = detect(pair, setup.detection, seed, n_shots=n_repeats)
    else:
        rng = make_rng(seed)
        counts = rng.multinomial(n_repeats, np.clip(np.ravel(pair), 0, None) / np.sum(pair))
    return parity(np.asarray(counts, dtype=float) / n_repeats)


def parity_scan(setup, control, target, tau, phis=None, n_echo=84, pattern="xy4",
                n_repeats=None, seed=0, entangle=True):
    """Prepare a Bell pair with the CNOT and scan the joint analysis phase.

    ``entangle=False`` replaces the CNOT by the identity (control in a
    superposition, target in ``|down>``) as a product-state reference.
    """
    phis = default_phis(20) if phis is None else np.asarray(phis, dtype=float)
    if entangle:
        seq = build_cnot(control, target, tau, n_echo, pattern, control_prep="superposition",
                         rabi=setup.rabi)
    else:
        seq = PulseSequence((Rotation((control,), math.pi / 2, 1.5 * math.pi, setup.rabi),))
    ens = setup.ensemble(seq, derive_seed(seed, 2))
    pi_z = _observe_pair(setup, measure_populations(ens, [control, target]), n_repeats,
                         derive_seed(seed, 3))
    values = np.empty(len(phis))
    for k, phi in enumerate(phis):
        analysis = PulseSequence((Rotation((control, target), math.pi / 2, float(phi), setup.rabi),))
        pair = measure_populations(ens.then(analysis, setup.j, setup.crosstalk), [control, target])
        values[k] = _observe_pair(setup, pair, n_repeats, derive_seed(seed, 4, k))
    fit = fit_sinusoid(phis, values, period=math.pi)
    fidelity, _ = bell_fidelity(pi_z, fit.amplitude)
    return ParityResult(pi_z, fit.amplitude, fidelity, phis, values, fit, seed)
