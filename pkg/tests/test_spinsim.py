import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import trapezoid
from hypothesis import strategies as st

from pseudomolecule.errors import SequenceError
from pseudomolecule.spinsim import (
    ECHO_PATTERNS,
    NO_NOISE,
    CrosstalkModel,
    NoiseModel,
    PulseSequence,
    Rotation,
    SpinState,
    Wait,
    apply_rotation,
    apply_rotation_with_crosstalk,
    build_cnot,
    build_echo_ramsey,
    detuned_rotation_matrix,
    echo_block,
    evolve_free,
    measure_populations,
    run_ensemble,
    run_sequence,
    sample_noise_batch,
    sample_noise_trajectory,
)

import oracle
from conftest import TWO_PI

DOWN, UP = 0, 1


def random_sequence(rng, n, n_steps=10, rabi=TWO_PI * 60e3):
    steps = []
    for _ in range(n_steps):
        kind = rng.integers(3 if n > 1 else 2)
        if kind == 0:
            steps.append(Wait(float(rng.uniform(0, 2e-3))))
        elif kind == 1:
            steps.append(Rotation((int(rng.integers(n)),), float(rng.uniform(-4, 4)),
                                  float(rng.uniform(0, TWO_PI)), rabi))
        else:
            ions = tuple(int(i) for i in rng.choice(n, size=2, replace=False))
            steps.append(Rotation(ions, float(rng.uniform(0.1, 4)), float(rng.uniform(0, TWO_PI)),
                                  rabi))
    return PulseSequence(tuple(steps))


def random_j(rng, n):
    j = rng.uniform(-1, 1, (n, n)) * TWO_PI * 50
    j = j + j.T
    np.fill_diagonal(j, 0)
    return j


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return SpinState(v / np.linalg.norm(v))


# --- single-step propagators ---------------------------------------------------

def test_pi_pulse_examples():
    s = apply_rotation(SpinState.all_down(1), 0, math.pi, 0.0)
    assert s.amplitudes == pytest.approx([0, -1j], abs=1e-15)
    h = apply_rotation(SpinState.all_down(1), 0, math.pi / 2, 0.0)
    assert h.amplitudes == pytest.approx(np.array([1, -1j]) / math.sqrt(2), abs=1e-15)
    twice = apply_rotation(h, 0, math.pi / 2, 0.0)
    assert twice.amplitudes == pytest.approx(s.amplitudes, abs=1e-15)


def test_rotation_out_of_range():
    with pytest.raises(IndexError):
        apply_rotation(SpinState.all_down(2), 2, math.pi, 0.0)


def test_qubit_guard():
    with pytest.raises(ValueError):
        SpinState.all_down(13)


def test_measure_populations_examples():
    assert measure_populations(SpinState.all_down(3), [0, 2])[DOWN, DOWN] == 1.0
    bell = SpinState(np.array([1, 0, 0, 1]) / math.sqrt(2))
    p = measure_populations(bell, [0, 1])
    assert p == pytest.approx(np.array([[0.5, 0], [0, 0.5]]))
    s = apply_rotation(SpinState.all_down(1), 0, 2 * math.pi / 3, 0.3)
    assert measure_populations(s, [0])[UP] == pytest.approx(0.75, abs=1e-14)
    with pytest.raises(ValueError):
        measure_populations(s, [])


@pytest.mark.parametrize("phase", [0.0, 0.7, 2.0])
@pytest.mark.parametrize("start", [0.0, 13e-6, 1.7e-3])
@pytest.mark.parametrize("detuning", [TWO_PI * 50e3, -TWO_PI * 3e6])
def test_detuned_propagator_matches_time_dependent_integration(phase, start, detuning):
    rabi = TWO_PI * 60e3
    t = (math.pi / 2) / rabi
    got = detuned_rotation_matrix(rabi, detuning, t, phase, start)
    ref = oracle.detuned_pulse_ode(rabi, detuning, t, phase, start)
    assert np.max(np.abs(got - ref)) < 1e-8
    assert np.max(np.abs(got - oracle.detuned_pulse(rabi, detuning, t, phase, start))) < 1e-12


def test_crosstalk_degenerate_neighbor_gets_full_rotation():
    ct = CrosstalkModel(True, np.zeros(2))
    out = apply_rotation_with_crosstalk(SpinState.all_down(2), 0, math.pi, 0.0, TWO_PI * 6e4, ct)
    assert measure_populations(out, [0, 1])[UP, UP] == pytest.approx(1.0, abs=1e-14)


def test_crosstalk_three_mhz_neighbor_excitation():
    ct = CrosstalkModel(True, np.array([0.0, TWO_PI * 3e6]))
    out = apply_rotation_with_crosstalk(SpinState.all_down(2), 0, math.pi, 0.0, TWO_PI * 6e4, ct)
    assert measure_populations(out, [1])[UP] <= 4e-4


def test_crosstalk_disabled_is_plain_rotation():
    s = random_state(np.random.default_rng(0), 3)
    ct = CrosstalkModel(False, np.array([0.0, 1e7, 2e7]))
    a = apply_rotation_with_crosstalk(s, 1, 1.1, 0.4, TWO_PI * 6e4, ct)
    b = apply_rotation(s, 1, 1.1, 0.4)
    assert np.array_equal(a.amplitudes, b.amplitudes)


def test_evolve_free_examples():
    s = random_state(np.random.default_rng(1), 2)
    j = np.array([[0, 5.0], [5.0, 0]])
    assert np.array_equal(evolve_free(s, j, 0.0).amplitudes, s.amplitudes)

    # ion 0 in (down - i up)/sqrt2, ion 1 up: J tau = pi flips the ion-0 Bloch phase
    prep = apply_rotation(SpinState.from_bits([0, 1]), 0, math.pi / 2, 0.0)
    after = evolve_free(prep, j, math.pi / 5.0)
    a0 = prep.amplitudes.reshape(2, 2)[:, 1]
    a1 = after.amplitudes.reshape(2, 2)[:, 1]
    rel = np.angle(a1[1] / a1[0]) - np.angle(a0[1] / a0[0])
    assert abs(abs(math.remainder(rel, TWO_PI)) - math.pi) < 1e-12

    # J = 0, noise phase pi on ion 0 flips its relative phase
    plus = apply_rotation(SpinState.all_down(1), 0, math.pi / 2, 0.0)
    flipped = evolve_free(plus, np.zeros((1, 1)), 1e-3, detuning_integrals=[math.pi])
    ratio = (flipped.amplitudes[1] / flipped.amplitudes[0]) / (plus.amplitudes[1] / plus.amplitudes[0])
    assert ratio == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValueError):
        evolve_free(s, j, -1.0)


# --- brute-force oracle ----------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("trial", range(10))
def test_run_sequence_matches_matrix_oracle(n, trial):
    rng = np.random.default_rng(100 * n + trial)
    seq = random_sequence(rng, n, n_steps=12)
    j = random_j(rng, n)
    state = random_state(rng, n)
    omega = np.sort(rng.uniform(0, TWO_PI * 8e6, n))
    ct = CrosstalkModel(True, omega) if trial % 2 else None
    got = run_sequence(state, seq, j, crosstalk=ct).amplitudes
    u = oracle.sequence_unitary(seq, j, n, crosstalk_omega=omega if ct else None)
    assert np.max(np.abs(got - u @ state.amplitudes)) < 1e-10


def test_run_sequence_with_noise_matches_oracle():
    rng = np.random.default_rng(5)
    n = 3
    seq = random_sequence(rng, n, n_steps=14)
    j = random_j(rng, n)
    noise = NoiseModel(sigma=TWO_PI * 2e3, tau_c=1e-3, dt=5e-6)
    traj = sample_noise_trajectory(noise, seq.total_duration, seed=9)
    start, stop = np.array(seq.wait_windows()).T
    phases = traj.phase_integral(start, stop)
    state = random_state(rng, n)
    got = run_sequence(state, seq, j, noise, seed=9).amplitudes
    u = oracle.sequence_unitary(seq, j, n, wait_phases=phases)
    assert np.max(np.abs(got - u @ state.amplitudes)) < 1e-10


def test_empty_sequence_is_identity():
    s = random_state(np.random.default_rng(2), 3)
    assert np.array_equal(run_sequence(s, PulseSequence(), np.zeros((3, 3))).amplitudes,
                          s.amplitudes)


def test_single_ion_ramsey_visibility_one():
    phis = np.linspace(0, TWO_PI, 9)
    p = []
    for phi in phis:
        seq = PulseSequence((Rotation(0, math.pi / 2), Wait(1e-3), Rotation(0, math.pi / 2, phi)))
        p.append(measure_populations(run_sequence(SpinState.all_down(1), seq,
                                                  np.zeros((1, 1))), [0])[UP])
    assert np.asarray(p) == pytest.approx((1 + np.cos(phis)) / 2, abs=1e-12)


def test_noise_requires_seed():
    noise = NoiseModel(sigma=1e3)
    with pytest.raises(SequenceError):
        run_sequence(SpinState.all_down(1), PulseSequence((Wait(1e-4),)), np.zeros((1, 1)), noise)


# --- properties ------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4))
def test_norm_preserved(seed, n):
    rng = np.random.default_rng(seed)
    ct = CrosstalkModel(True, rng.uniform(0, 1e7, n))
    noise = NoiseModel(sigma=TWO_PI * 1e3, tau_c=1e-3, dt=1e-5)
    out = run_sequence(random_state(rng, n), random_sequence(rng, n), random_j(rng, n),
                       noise, ct, seed=seed)
    assert abs(out.norm() - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t1=st.floats(0, 5e-3), t2=st.floats(0, 5e-3),
       th=st.floats(-10, 10))
def test_waits_compose(seed, t1, t2, th):
    rng = np.random.default_rng(seed)
    s = random_state(rng, 3)
    j = random_j(rng, 3)
    w = np.full(3, th)
    split = evolve_free(evolve_free(s, j, t1, w * 0.25), j, t2, w * 0.75)
    whole = evolve_free(s, j, t1 + t2, w)
    assert np.max(np.abs(split.amplitudes - whole.amplitudes)) < 1e-12


# --- noise -----------------------------------------------------------------------

def test_zero_sigma_gives_zero_trajectory():
    traj = sample_noise_trajectory(NoiseModel(sigma=0.0), 1e-3, seed=0)
    assert np.all(traj.values == 0)


def test_ou_stationary_statistics():
    sigma, tau_c, dt = 2.0, 1e-3, 1e-4
    model = NoiseModel(sigma=sigma, tau_c=tau_c, dt=dt)
    x = sample_noise_trajectory(model, 1e5 * dt, seed=11).values
    assert np.var(x) == pytest.approx(sigma**2, rel=0.03)
    lag = int(round(tau_c / dt))
    acf = np.mean((x[:-lag] - x.mean()) * (x[lag:] - x.mean()))
    assert acf == pytest.approx(sigma**2 / math.e, rel=0.05)


def test_phase_integral_is_trapezoidal():
    model = NoiseModel(sigma=5.0, tau_c=1e-3, dt=1e-4)
    traj = sample_noise_trajectory(model, 2e-3, seed=3)
    x = traj.values
    assert traj.phase_integral(0.0, 2e-3) == pytest.approx(trapezoid(x, dx=1e-4), rel=1e-12)
    # exact for the piecewise-linear interpolant on a partial step
    t = np.linspace(3e-4, 1.25e-3, 20001)
    assert traj.phase_integral(3e-4, 1.25e-3) == pytest.approx(
        trapezoid(np.interp(t, np.arange(len(x)) * 1e-4, x), t), rel=1e-6)


def test_noise_is_deterministic_and_batch_size_independent():
    model = NoiseModel(sigma=1.0, tau_c=1e-3, dt=1e-4)
    a = sample_noise_batch(model, 1e-3, seed=4, n_trajectories=3).values
    b = sample_noise_batch(model, 1e-3, seed=4, n_trajectories=5).values
    assert np.array_equal(a, b[:3])
    assert not np.array_equal(b[0], b[1])


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(sigma=1.0, tau_c=1e-3, dt=2e-4)
    with pytest.raises(ValueError):
        NoiseModel(sigma=-1.0)
    with pytest.raises(ValueError):
        NoiseModel(kind="pink")
    assert not NO_NOISE.active


def test_ensemble_rows_are_independent_realizations():
    noise = NoiseModel(sigma=TWO_PI * 2e3, tau_c=1e-3, dt=5e-6)
    seq = PulseSequence((Rotation(0, math.pi / 2), Wait(3e-4)))
    ens = run_ensemble(SpinState.all_down(1), seq, np.zeros((1, 1)), noise, 7, 4)
    assert ens.n_trajectories == 4
    assert len({round(float(np.angle(a[1] / a[0])), 12) for a in ens.amplitudes}) == 4
    with pytest.raises(SequenceError):
        ens.then(PulseSequence((Wait(1e-6),)), np.zeros((1, 1)))


# --- sequence builders -----------------------------------------------------------

def test_echo_block_cpmg_timing():
    block = echo_block((0, 1), 8e-3, 4, "xy4")
    waits = [s.duration for s in block.steps if isinstance(s, Wait)]
    assert waits == pytest.approx([1e-3, 2e-3, 2e-3, 2e-3, 1e-3])
    assert [s.phase for s in block.steps if isinstance(s, Rotation)] == list(ECHO_PATTERNS["xy4"])
    assert block.total_duration == pytest.approx(8e-3)


def test_echo_pattern_validation():
    with pytest.raises(SequenceError):
        echo_block((0,), 1e-3, 6, "xy4")
    with pytest.raises(SequenceError):
        echo_block((0,), 1e-3, 2, "nope")
    assert len(echo_block((0,), 1e-3, 3, [0.1, 0.2, 0.3]).steps) == 7
    with pytest.raises(SequenceError):
        build_cnot(0, 1, 1e-3, n_echo=3, pattern="uniform")
    with pytest.raises(SequenceError):
        build_echo_ramsey(1, 1, 1e-3)


def test_plain_ramsey_and_hahn_echo_shapes():
    plain = build_echo_ramsey(0, 1, 1e-3, n_echo=0)
    assert [type(s).__name__ for s in plain.steps] == ["Rotation", "Wait", "Rotation"]
    hahn = build_echo_ramsey(0, 1, 1e-3, n_echo=1, pattern="uniform", control_prep="up")
    assert [s.ions for s in hahn.steps if isinstance(s, Rotation)] == [(0,), (1,), (0, 1), (1,)]


def test_sequence_json_round_trip():
    seq = build_cnot(0, 2, 10.7e-3, n_echo=8, control_prep="superposition")
    text = seq.to_json()
    assert PulseSequence.from_json(text) == seq
    doc = seq.to_dict()
    assert doc["steps"][1]["type"] == "rotation"
    assert doc["steps"][2] == {"type": "wait", "duration_s": 10.7e-3 / 16}
    with pytest.raises(SequenceError):
        PulseSequence.from_dict({"steps": [{"type": "laser"}]})


def test_cnot_truth_table_ideal(ref_j):
    tau = math.pi / (2 * ref_j[0, 2])
    expected = {(0, 0): (0, 0), (1, 0): (1, 1), (0, 1): (0, 1), (1, 1): (1, 0)}
    for (c, t), out in expected.items():
        seq = build_cnot(0, 2, tau, control_prep=c, target_prep=t)
        p = measure_populations(run_sequence(SpinState.all_down(3), seq, ref_j), [0, 2])
        assert p[out] > 0.999


def test_cnot_on_superposition_makes_bell_state(ref_j):
    tau = math.pi / (2 * ref_j[0, 2])
    seq = build_cnot(0, 2, tau, control_prep="superposition")
    p = measure_populations(run_sequence(SpinState.all_down(3), seq, ref_j), [0, 2])
    assert p[DOWN, DOWN] + p[UP, UP] == pytest.approx(1.0, abs=1e-9)
    assert p[DOWN, DOWN] == pytest.approx(0.5, abs=1e-9)


def test_cnot_without_coupling_time_is_local(ref_j):
    # no conditional phase: the target outcome ignores the control
    p = [measure_populations(run_sequence(SpinState.all_down(3),
                                          build_cnot(0, 2, 0.0, control_prep=c), ref_j), [2])
         for c in ("down", "up")]
    assert p[0] == pytest.approx(p[1], abs=1e-12)
