"""Pulse sequences, echo/CNOT builders and the sequence interpreter.

Rotations are instantaneous on the free-evolution clock: J coupling and
noise act only during :class:`Wait` steps. The pulse length ``theta / rabi``
is used only for the off-resonant crosstalk propagator.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..constants import TWO_PI
from ..errors import SequenceError
from .noise import NO_NOISE, sample_noise_batch, sample_noise_trajectory
from .state import (
    SpinState,
    apply_rotation_with_crosstalk,
    as_amplitudes,
    free_phases,
    n_qubits_of,
)

DEFAULT_RABI = TWO_PI * 60e3

ECHO_PATTERNS = {
    "uniform": (0.0,),
    "alternating": (0.0, math.pi),
    "xy4": (0.0, math.pi / 2, 0.0, math.pi / 2),
}


@dataclass(frozen=True)
class Rotation:
    """Resonant pulse on ``ions`` (simultaneous when more than one)."""

    ions: tuple
    theta: float
    phase: float = 0.0
    rabi: float = DEFAULT_RABI

    def __post_init__(self):
        ions = (self.ions,) if isinstance(self.ions, (int, np.integer)) else tuple(self.ions)
        if not ions:
            raise SequenceError("rotation needs at least one ion")
        if len(set(ions)) != len(ions):
            raise SequenceError("duplicate ion in simultaneous rotation")
        if not self.rabi > 0:
            raise SequenceError("rabi frequency must be positive")
        object.__setattr__(self, "ions", tuple(int(i) for i in ions))

    @property
    def duration(self):
        return abs(self.theta) / self.rabi

    def to_dict(self):
        return {
            "type": "rotation" if len(self.ions) == 1 else "simultaneous_rotation",
            "ions": list(self.ions),
            "theta_rad": self.theta,
            "phase_rad": self.phase,
            "rabi_rad_per_s": self.rabi,
        }


@dataclass(frozen=True)
class Wait:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise SequenceError("wait duration must be >= 0")

    def to_dict(self):
        return {"type": "wait", "duration_s": self.duration}


@dataclass(frozen=True)
class PulseSequence:
    steps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def total_duration(self):
        """Free-evolution wall-clock time in seconds."""
        return sum(s.duration for s in self.steps if isinstance(s, Wait))

    @property
    def pulse_time(self):
        return sum(s.duration for s in self.steps if isinstance(s, Rotation))

    def __add__(self, other):
        return PulseSequence(self.steps + tuple(other.steps))

    def wait_windows(self):
        """``(start, stop)`` times of each wait on the free-evolution clock."""
        t = 0.0
        windows = []
        for step in self.steps:
            if isinstance(step, Wait):
                windows.append((t, t + step.duration))
                t += step.duration
        return windows

    def to_dict(self):
        return {
            "units": {"time": "s", "angle": "rad", "rabi": "rad/s"},
            "total_duration_s": self.total_duration,
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc):
        steps = []
        for raw in doc["steps"]:
            kind = raw.get("type")
            if kind == "wait":
                steps.append(Wait(float(raw["duration_s"])))
            elif kind in ("rotation", "simultaneous_rotation"):
                steps.append(
                    Rotation(
                        tuple(raw["ions"]),
                        float(raw["theta_rad"]),
                        float(raw.get("phase_rad", 0.0)),
                        float(raw.get("rabi_rad_per_s", DEFAULT_RABI)),
                    )
                )
            else:
                raise SequenceError(f"unknown step type {kind!r}")
        return cls(tuple(steps))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def resolve_pattern(pattern):
    if isinstance(pattern, str):
        try:
            return ECHO_PATTERNS[pattern]
        except KeyError:
            raise SequenceError(
                f"unknown echo pattern {pattern!r}; choose from {sorted(ECHO_PATTERNS)}"
            ) from None
    phases = tuple(float(p) for p in pattern)
    if not phases:
        raise SequenceError("echo phase pattern is empty")
    return phases


def echo_block(ions, tau, n_echo, pattern="xy4", rabi=DEFAULT_RABI):
    """``n_echo`` pi pulses on ``ions`` with CPMG timing spread over ``tau``.

    Waits are ``tau/2n, tau/n, ..., tau/n, tau/2n``; pulse ``k`` uses phase
    ``pattern[k % len(pattern)]``. ``n_echo = 0`` gives a single wait.
    """
    if n_echo < 0:
        raise SequenceError("n_echo must be >= 0")
    if tau < 0:
        raise SequenceError("tau must be >= 0")
    if n_echo == 0:
        return PulseSequence((Wait(tau),))
    phases = resolve_pattern(pattern)
    if n_echo % len(phases):
        raise SequenceError(
            f"pattern length {len(phases)} does not divide n_echo={n_echo}"
        )
    steps = [Wait(tau / (2 * n_echo))]
    for k in range(n_echo):
        steps.append(Rotation(tuple(ions), math.pi, phases[k % len(phases)], rabi))
        steps.append(Wait(tau / n_echo if k < n_echo - 1 else tau / (2 * n_echo)))
    return PulseSequence(tuple(steps))


# pi/2 pulse phase that maps |down> to (|down> + |up>)/sqrt(2)
SUPERPOSITION_PHASE = 1.5 * math.pi


def _prep_steps(ion, prep, rabi):
    if prep in ("down", 0, False):
        return []
    if prep in ("up", 1, True):
        return [Rotation((ion,), math.pi, 0.0, rabi)]
    if prep == "superposition":
        return [Rotation((ion,), math.pi / 2, SUPERPOSITION_PHASE, rabi)]
    raise SequenceError(f"unknown preparation {prep!r}")


def build_echo_ramsey(control, target, tau, n_echo=0, pattern="xy4", final_phase=0.0,
                      control_prep="down", target_prep="down", echo_on="both",
                      rabi=DEFAULT_RABI):
    """Ramsey sequence on ``target`` with the control prepared in ``control_prep``.

    ``echo_on`` selects which ions receive the echo pulses: ``"both"`` keeps
    the control-target coupling active, ``"target"`` refocuses it as well.
    """
    if control == target:
        raise SequenceError("control and target must differ")
    if echo_on == "both":
        echo_ions = (control, target)
    elif echo_on == "target":
        echo_ions = (target,)
    else:
        raise SequenceError(f"echo_on must be 'both' or 'target', got {echo_on!r}")
    steps = _prep_steps(control, control_prep, rabi) + _prep_steps(target, target_prep, rabi)
    steps.append(Rotation((target,), math.pi / 2, 0.0, rabi))
    steps.extend(echo_block(echo_ions, tau, n_echo, pattern, rabi).steps)
    steps.append(Rotation((target,), math.pi / 2, final_phase, rabi))
    return PulseSequence(tuple(steps))


CNOT_PHASE = 1.5 * math.pi


def build_cnot(control, target, tau, n_echo=84, pattern="xy4", control_prep="down",
               target_prep="down", final_phase=CNOT_PHASE, rabi=DEFAULT_RABI):
    """Conditional-phase CNOT: echo-Ramsey on the target with final phase 3pi/2.

    ``tau = pi / (2 J)`` gives a conditional phase of pi. The echo count must
    be even so that the control ends in its initial state.
    """
    if n_echo % 2:
        raise SequenceError("CNOT needs an even number of echo pulses")
    return build_echo_ramsey(control, target, tau, n_echo, pattern, final_phase,
                             control_prep, target_prep, "both", rabi)


def _propagate(amps, seq, j, wait_phases, weights, crosstalk):
    """Run ``seq`` on a (batched) amplitude array.

    ``wait_phases[..., w]`` is the collective noise phase accumulated during
    wait ``w``; ``None`` means no noise.
    """
    n = n_qubits_of(amps)
    for step in seq.steps:
        for ion in getattr(step, "ions", ()):
            if not 0 <= ion < n:
                raise IndexError(f"ion index {ion} out of range for {n} qubits")
    clock = 0.0
    w = 0
    for step in seq.steps:
        if isinstance(step, Wait):
            theta = None
            if wait_phases is not None:
                theta = wait_phases[..., w, None] * weights
            amps = amps * free_phases(j, step.duration, theta)
            clock += step.duration
            w += 1
        else:
            for ion in step.ions:
                amps = apply_rotation_with_crosstalk(
                    amps, ion, step.theta, step.phase, step.rabi, crosstalk,
                    start_time=clock, exclude=step.ions,
                )
    return amps


def _wait_phases(trajectory, seq):
    windows = seq.wait_windows()
    if not windows:
        return None
    start, stop = np.array(windows).T
    return trajectory.phase_integral(start, stop)


def run_sequence(state, seq, j, noise=NO_NOISE, crosstalk=None, seed=None):
    """Apply ``seq`` to ``state`` for a single noise realization."""
    amps = as_amplitudes(state)
    n = n_qubits_of(amps)
    phases = None
    weights = None
    if noise is not None and noise.active:
        if seed is None:
            raise SequenceError("a seed is required when noise is active")
        traj = sample_noise_trajectory(noise, seq.total_duration, seed)
        phases = _wait_phases(traj, seq)
        weights = noise.ion_weights(n)
    return SpinState(_propagate(amps, seq, j, phases, weights, crosstalk))


@dataclass(frozen=True)
class Ensemble:
    """Final states of independent noise trajectories, one row each."""

    amplitudes: np.ndarray
    seed: object = None

    @property
    def n_trajectories(self):
        return self.amplitudes.shape[0]

    @property
    def n_qubits(self):
        return n_qubits_of(self.amplitudes)

    def then(self, seq, j, crosstalk=None):
        """Continue with a noiseless (instantaneous) sequence, e.g. analysis pulses."""
        if seq.total_duration > 0:
            raise SequenceError("continuation must not contain waits")
        return Ensemble(_propagate(self.amplitudes, seq, j, None, None, crosstalk), self.seed)


def run_ensemble(state, seq, j, noise, seed, n_trajectories, crosstalk=None):
    """Run ``seq`` for ``n_trajectories`` noise realizations.

    Trajectory ``i`` uses the stream ``(seed, i)``, so results are independent
    of batch size and of the order in which trajectories are combined.
    """
    amps = as_amplitudes(state)
    n = n_qubits_of(amps)
    batch = np.broadcast_to(amps, (n_trajectories,) + amps.shape).copy()
    if noise is None or not noise.active:
        return Ensemble(_propagate(batch, seq, j, None, None, crosstalk), seed)
    traj = sample_noise_batch(noise, seq.total_duration, seed, n_trajectories)
    phases = _wait_phases(traj, seq)
    return Ensemble(_propagate(batch, seq, j, phases, noise.ion_weights(n), crosstalk), seed)
