"""State vectors and the exact single-step propagators.

Basis convention: ion ``l`` is axis ``l`` of the amplitude tensor, index 0 is
``|down>`` and index 1 is ``|up>``; ``sigma_z |up> = +|up>``. Amplitude
arrays may carry leading batch axes (one row per noise trajectory).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_QUBITS = 12


@dataclass(frozen=True)
class CrosstalkModel:
    """Off-resonant driving of non-addressed ions.

    ``omega`` holds the qubit resonance of every ion (rad/s); only
    differences enter.
    """

    enabled: bool = False
    omega: np.ndarray = None

    def __post_init__(self):
        if self.enabled and self.omega is None:
            raise ValueError("crosstalk needs the ion resonance frequencies")
        if self.omega is not None:
            object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))

    @classmethod
    def from_frequencies(cls, freqs, enabled=True):
        return cls(enabled, np.asarray(getattr(freqs, "omega", freqs), dtype=float))


@dataclass(frozen=True)
class SpinState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = int(round(np.log2(amps.shape[-1])))
        if amps.ndim != 1 or 2**n != amps.shape[-1]:
            raise ValueError("amplitudes must be a 1-d array of length 2**N")
        if n > MAX_QUBITS:
            raise ValueError(f"at most {MAX_QUBITS} qubits are supported")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self):
        return n_qubits_of(self.amplitudes)

    @classmethod
    def from_bits(cls, bits):
        """Product state; ``bits[l]`` is 1 for ``|up>`` and 0 for ``|down>``."""
        n = len(bits)
        amps = np.zeros(2**n, dtype=complex)
        amps[int("".join(str(int(b)) for b in bits), 2) if n else 0] = 1.0
        return cls(amps)

    @classmethod
    def all_down(cls, n):
        return cls.from_bits([0] * n)

    def norm(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def n_qubits_of(amps):
    return int(amps.shape[-1]).bit_length() - 1


def as_amplitudes(state):
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


def rotation_matrix(theta, phase):
    """``exp(-i theta/2 (cos(phase) sx + sin(phase) sy))`` in the (down, up) basis."""
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    return np.array(
        [[c, -1j * s * np.exp(1j * phase)], [-1j * s * np.exp(-1j * phase), c]],
        dtype=complex,
    )


def detuned_rotation_matrix(rabi, detuning, duration, phase, start_time=0.0):
    """Off-resonant square-pulse propagator expressed in the ion's own frame.

    The drive-frame propagator for ``H = detuning/2 sz + rabi/2 s_phase`` is
    taken at the drive phase seen by the ion at ``start_time`` and followed by
    removal of the free precession at ``detuning`` over ``duration``.
    """
    if detuning == 0:
        return rotation_matrix(rabi * duration, phase)
    phi = phase - detuning * start_time
    gen = np.hypot(rabi, detuning)
    c = np.cos(gen * duration / 2)
    s = np.sin(gen * duration / 2) / gen
    u_drive = np.array(
        [
            [c + 1j * s * detuning, -1j * s * rabi * np.exp(1j * phi)],
            [-1j * s * rabi * np.exp(-1j * phi), c - 1j * s * detuning],
        ],
        dtype=complex,
    )
    frame = np.exp(0.5j * detuning * duration * np.array([-1.0, 1.0]))
    return frame[:, None] * u_drive


def apply_single(amps, matrix, ion):
    """Apply a 2x2 ``matrix`` to ``ion`` of a (batched) amplitude array."""
    amps = as_amplitudes(amps)
    n = n_qubits_of(amps)
    if not 0 <= ion < n:
        raise IndexError(f"ion index {ion} out of range for {n} qubits")
    batch = amps.shape[:-1]
    t = amps.reshape(batch + (2**ion, 2, 2 ** (n - ion - 1)))
    out = np.einsum("ab,...xby->...xay", matrix, t)
    return out.reshape(amps.shape)


def apply_rotation(state, target, theta, phase):
    """Resonant rotation ``R(theta, phase)`` on ``target``."""
    return SpinState(apply_single(as_amplitudes(state), rotation_matrix(theta, phase), target))


@lru_cache(maxsize=None)
def spin_signs(n):
    """``signs[k, l]`` = +1 if ion l is up in basis state k, else -1."""
    k = np.arange(2**n)
    bits = (k[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    signs = 2.0 * bits - 1.0
    signs.flags.writeable = False
    return signs


def free_phases(j, tau, detuning_integrals=None):
    """Diagonal of the free-evolution propagator.

    ``exp(i/2 sum_{i<j} J_ij s_i s_j tau) * exp(-i/2 sum_i s_i theta_i)``;
    ``detuning_integrals`` may be batched with shape ``(..., N)``.
    """
    j = np.asarray(getattr(j, "j", j), dtype=float)
    n = j.shape[0]
    s = spin_signs(n)
    zz = 0.5 * np.einsum("ki,ij,kj->k", s, j - np.diag(np.diag(j)), s)
    phase = 0.5 * zz * tau
    if detuning_integrals is not None:
        theta = np.asarray(detuning_integrals, dtype=float)
        phase = phase - 0.5 * theta @ s.T
    return np.exp(1j * phase)


def evolve_free(state, j, tau, detuning_integrals=None):
    """Exact evolution under the Ising J coupling plus accumulated noise phases."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    amps = as_amplitudes(state)
    out = amps * free_phases(j, tau, detuning_integrals)
    if isinstance(state, SpinState):
        return SpinState(out)
    return out


def apply_rotation_with_crosstalk(state, driven, theta, phase, rabi, crosstalk=None,
                                  start_time=0.0, exclude=()):
    """Rotate ``driven`` and apply the off-resonant pulse to every other ion.

    Non-driven ions see detuning ``omega_k - omega_driven`` for the pulse
    duration ``theta / rabi``. Ions in ``exclude`` are left untouched (they
    are being driven by their own tone in a simultaneous pulse).
    """
    amps = as_amplitudes(state)
    amps = apply_single(amps, rotation_matrix(theta, phase), driven)
    if crosstalk is not None and crosstalk.enabled:
        omega = crosstalk.omega
        duration = theta / rabi
        for k in range(n_qubits_of(amps)):
            if k == driven or k in exclude:
                continue
            u = detuned_rotation_matrix(rabi, omega[k] - omega[driven], duration, phase, start_time)
            amps = apply_single(amps, u, k)
    if isinstance(state, SpinState):
        return SpinState(amps)
    return amps


def measure_populations(state, ions):
    """Born-rule marginal over ``ions``; shape ``(2,)*len(ions)``.

    Batched amplitude arrays (and ensembles) are averaged over the batch.
    """
    ions = list(ions)
    if not ions:
        raise ValueError("ion subset must be nonempty")
    amps = as_amplitudes(state)
    n = n_qubits_of(amps)
    probs = np.abs(amps) ** 2
    probs = probs.reshape((-1,) + (2,) * n).mean(axis=0)
    other = tuple(a for a in range(n) if a not in ions)
    marginal = probs.sum(axis=other) if other else probs
    # summed axes keep ascending order; permute to the requested order
    kept = sorted(ions)
    return np.transpose(marginal, [kept.index(i) for i in ions])
