"""Run configuration: INI documents with sections, unit tags and includes.

A document may start with ``[meta] include = <name or path>``; the included
document is loaded first and the including one overrides it key by key.
``apparatus`` names the built-in apparatus file.
"""

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .constants import ATOMIC_MASS_UNIT, TWO_PI
from .crystal import YB171, IonSpecies, TrapConfig
from .errors import ConfigError
from .field import FieldParams
from .spinsim import ECHO_PATTERNS, NoiseModel

BUILTIN = {"apparatus": "apparatus.ini"}

FREQ_UNITS = {
    "rad/s": 1.0,
    "2pi*hz": TWO_PI,
    "2pi*khz": TWO_PI * 1e3,
    "2pi*mhz": TWO_PI * 1e6,
}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6}

SPECIES_PRESETS = {"yb171": YB171}
MAX_CHAIN = 50


def _read_text(source):
    if source in BUILTIN:
        return resources.files("pseudomolecule.data").joinpath(BUILTIN[source]).read_text()
    return Path(source).read_text()


def load_parser(source, _seen=None):
    """Parse ``source`` (builtin name or path) with includes resolved."""
    seen = set() if _seen is None else _seen
    key = str(source)
    if key in seen:
        raise ConfigError("meta.include", f"include cycle through {key}")
    seen.add(key)
    try:
        text = _read_text(source)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {source}: {exc}") from None
    own = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        own.read_string(text, source=key)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc)) from None

    merged = configparser.ConfigParser(inline_comment_prefixes=("#",))
    include = own.get("meta", "include", fallback=None)
    if include:
        if include not in BUILTIN and source not in BUILTIN:
            include = str(Path(source).parent / include)
        base = load_parser(include, seen)
        merged.read_dict({s: dict(base[s]) for s in base.sections()})
    merged.read_dict({s: dict(own[s]) for s in own.sections() if s != "meta"})
    return merged


def _split_unit(raw):
    parts = raw.replace(",", " ").split()
    if parts and parts[-1].lower() in set(FREQ_UNITS) | set(TIME_UNITS):
        return parts[:-1], parts[-1].lower()
    return parts, None


def _numbers(raw, key):
    values, unit = _split_unit(raw)
    try:
        nums = [float(v) for v in values]
    except ValueError:
        raise ConfigError(key, f"not a number: {raw!r}") from None
    if not nums:
        raise ConfigError(key, "empty value")
    return nums, unit


def parse_frequency_list(raw, key):
    nums, unit = _numbers(raw, key)
    if unit is None or unit not in FREQ_UNITS:
        raise ConfigError(key, f"frequency needs a unit tag {sorted(FREQ_UNITS)}: {raw!r}")
    return [x * FREQ_UNITS[unit] for x in nums]


def parse_frequency(raw, key):
    values = parse_frequency_list(raw, key)
    if len(values) != 1:
        raise ConfigError(key, "expected a single value")
    return values[0]


def parse_time(raw, key):
    nums, unit = _numbers(raw, key)
    if len(nums) != 1:
        raise ConfigError(key, "expected a single value")
    if unit is not None and unit not in TIME_UNITS:
        raise ConfigError(key, f"bad time unit {unit!r}")
    return nums[0] * TIME_UNITS.get(unit, 1.0)


def parse_float(raw, key):
    nums, unit = _numbers(raw, key)
    if len(nums) != 1 or unit is not None:
        raise ConfigError(key, f"expected a plain number: {raw!r}")
    return nums[0]


def parse_int(raw, key):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(key, f"not an integer: {raw!r}") from None


def parse_pair(raw, key):
    """Two 1-based ion labels to a 0-based index pair."""
    parts = raw.replace("-", " ").replace(",", " ").split()
    try:
        a, b = (int(p) for p in parts)
    except ValueError:
        raise ConfigError(key, f"expected two ion labels: {raw!r}") from None
    if min(a, b) < 1:
        raise ConfigError(key, "ion labels start at 1")
    if a == b:
        raise ConfigError(key, "pair must name two different ions")
    return a - 1, b - 1


def check_pair(pair, n_ions, key):
    """Range check deferred to the commands that use the pair."""
    for x in pair:
        if x >= n_ions:
            raise ConfigError(key, f"ion label {x + 1} outside 1..{n_ions}")
    return pair


def _positive(value, key):
    if not value > 0:
        raise ConfigError(key, f"must be positive, got {value}")
    return value


def _auto_time(raw, key):
    if raw.strip().lower() == "auto":
        return None
    return _positive(parse_time(raw, key), key)


@dataclass
class ExperimentParams:
    pair: tuple
    tau: float = None  # None: choose from the computed J


@dataclass
class RunConfig:
    species: IonSpecies
    trap: TrapConfig
    field: FieldParams
    gradients: object  # None for computed, else array of T/m
    noise: NoiseModel
    n_trajectories: int
    crosstalk: bool
    detection_enabled: bool
    detection_targets: tuple
    rabi: float
    n_echo: int
    pattern: str
    phi_points: int
    repeats: int
    spectrum_pulse_len: float
    spectrum_rabi: float
    spectrum_span: float
    spectrum_points: int
    scan_nu_axial: list
    scan_gradient: float
    scan_n_ions: int
    measure_pairs: list
    measure_tau: float
    cnot: ExperimentParams
    parity: ExperimentParams
    parity_phi_points: int
    seed: int
    out: str
    resolved: dict = field(default_factory=dict)

    def with_ideal(self):
        """Copy with noise and detection switched off (crosstalk is kept)."""
        from dataclasses import replace

        resolved = {s: dict(v) for s, v in self.resolved.items()}
        resolved.setdefault("noise", {})["kind"] = "none"
        resolved.setdefault("detection", {})["enabled"] = "false"
        return replace(self, noise=NoiseModel(kind="none"), detection_enabled=False,
                       resolved=resolved)


def _get(cp, section, option, fallback=None):
    if cp.has_option(section, option):
        return cp.get(section, option)
    if fallback is None:
        raise ConfigError(f"{section}.{option}", "missing")
    return fallback


def build_config(cp):
    """Validate a parsed document and produce a :class:`RunConfig`."""
    preset = _get(cp, "species", "preset", "custom").strip().lower()
    if preset in SPECIES_PRESETS:
        species = SPECIES_PRESETS[preset]
    elif preset == "custom":
        mass = _positive(parse_float(_get(cp, "species", "mass_u"), "species.mass_u"),
                         "species.mass_u")
        species = IonSpecies(
            mass=mass * ATOMIC_MASS_UNIT,
            g_factor=parse_float(_get(cp, "species", "g_factor", "1.0"), "species.g_factor"),
        )
    else:
        raise ConfigError("species.preset", f"unknown preset {preset!r}")

    nu_axial = _positive(parse_frequency(_get(cp, "trap", "nu_axial"), "trap.nu_axial"),
                         "trap.nu_axial")
    nu_radial = _positive(parse_frequency(_get(cp, "trap", "nu_radial"), "trap.nu_radial"),
                          "trap.nu_radial")
    n_ions = parse_int(_get(cp, "trap", "n_ions"), "trap.n_ions")
    if not 1 <= n_ions <= MAX_CHAIN:
        raise ConfigError("trap.n_ions", f"must be between 1 and {MAX_CHAIN}")
    trap = TrapConfig(nu_axial, nu_radial, n_ions)

    b_par = parse_float(_get(cp, "field", "b_parallel0"), "field.b_parallel0")
    b_perp = parse_float(_get(cp, "field", "b_perp0"), "field.b_perp0")
    grad = parse_float(_get(cp, "field", "grad_pm"), "field.grad_pm")
    if b_perp < 0:
        raise ConfigError("field.b_perp0", "must be >= 0")
    if grad < 0:
        raise ConfigError("field.grad_pm", "must be >= 0")
    field_params = FieldParams(b_par, b_perp, grad)
    raw_grad = _get(cp, "field", "gradients", "computed").strip().lower()
    gradients = None
    if raw_grad != "computed":
        gradients = np.array(_numbers(raw_grad, "field.gradients")[0])
        if gradients.shape != (n_ions,):
            raise ConfigError("field.gradients", f"need {n_ions} values")

    kind = _get(cp, "noise", "kind", "none").strip().lower()
    if kind not in ("none", "ornstein_uhlenbeck"):
        raise ConfigError("noise.kind", f"unknown noise kind {kind!r}")
    if kind == "none":
        noise = NoiseModel(kind="none")
    else:
        sigma = parse_frequency(_get(cp, "noise", "sigma"), "noise.sigma")
        if sigma < 0:
            raise ConfigError("noise.sigma", "must be >= 0")
        tau_c = _positive(parse_time(_get(cp, "noise", "tau_c"), "noise.tau_c"), "noise.tau_c")
        dt = _positive(parse_time(_get(cp, "noise", "dt"), "noise.dt"), "noise.dt")
        if dt > tau_c / 10:
            raise ConfigError("noise.dt", "must not exceed tau_c / 10")
        noise = NoiseModel(kind, sigma, tau_c, dt)
    n_traj = _positive(parse_int(_get(cp, "noise", "trajectories", "1000"),
                                 "noise.trajectories"), "noise.trajectories")

    crosstalk = _bool(cp, "crosstalk", "enabled", "false")
    det_enabled = _bool(cp, "detection", "enabled", "false")
    targets = tuple(_numbers(_get(cp, "detection", "targets", "0.985, 0.889, 0.852"),
                             "detection.targets")[0])
    if len(targets) != 3 or not all(0 < t < 1 for t in targets):
        raise ConfigError("detection.targets", "need three rates in (0, 1)")

    rabi = _positive(parse_frequency(_get(cp, "pulses", "rabi", "60 2pi*kHz"), "pulses.rabi"),
                     "pulses.rabi")
    n_echo = parse_int(_get(cp, "pulses", "n_echo", "84"), "pulses.n_echo")
    if n_echo < 0:
        raise ConfigError("pulses.n_echo", "must be >= 0")
    pattern = _get(cp, "pulses", "pattern", "xy4").strip().lower()
    if pattern not in ECHO_PATTERNS:
        raise ConfigError("pulses.pattern", f"choose from {sorted(ECHO_PATTERNS)}")
    if n_echo % len(ECHO_PATTERNS[pattern]):
        raise ConfigError("pulses.n_echo", f"must be a multiple of the {pattern} length")
    phi_points = parse_int(_get(cp, "pulses", "phi_points", "16"), "pulses.phi_points")
    if phi_points < 4:
        raise ConfigError("pulses.phi_points", "need at least 4 points")
    repeats = _positive(parse_int(_get(cp, "pulses", "repeats", "50"), "pulses.repeats"),
                        "pulses.repeats")

    spec_len = _positive(parse_time(_get(cp, "spectrum", "pulse_len", "8 us"),
                                    "spectrum.pulse_len"), "spectrum.pulse_len")
    spec_rabi = _positive(parse_frequency(_get(cp, "spectrum", "rabi", "62.5 2pi*kHz"),
                                          "spectrum.rabi"), "spectrum.rabi")
    spec_span = _positive(parse_frequency(_get(cp, "spectrum", "span", "12 2pi*MHz"),
                                          "spectrum.span"), "spectrum.span")
    spec_points = parse_int(_get(cp, "spectrum", "points", "2401"), "spectrum.points")
    if spec_points < 3:
        raise ConfigError("spectrum.points", "need at least 3 points")

    raw_scan = _get(cp, "scan", "nu_axial", " ")
    if not raw_scan.replace(",", " ").split():
        raise ConfigError("scan.nu_axial", "empty list")
    scan_nus = parse_frequency_list(raw_scan, "scan.nu_axial")
    if any(v <= 0 for v in scan_nus):
        raise ConfigError("scan.nu_axial", "frequencies must be positive")
    scan_grad = parse_float(_get(cp, "scan", "gradient", "19.0"), "scan.gradient")
    scan_n = parse_int(_get(cp, "scan", "n_ions", "2"), "scan.n_ions")
    if scan_n < 2:
        raise ConfigError("scan.n_ions", "need at least two ions")

    pairs_raw = _get(cp, "measure_j", "pairs", "1-2")
    pairs = [parse_pair(p, "measure_j.pairs") for p in pairs_raw.split(",")]
    measure_tau = _auto_time(_get(cp, "measure_j", "tau", "auto"), "measure_j.tau")

    cnot = ExperimentParams(parse_pair(_get(cp, "cnot", "pair", "1, 2"), "cnot.pair"),
                            _auto_time(_get(cp, "cnot", "tau", "auto"), "cnot.tau"))
    parity = ExperimentParams(
        parse_pair(_get(cp, "parity", "pair", "1, 2"), "parity.pair"),
        _auto_time(_get(cp, "parity", "tau", "auto"), "parity.tau"),
    )
    parity_points = parse_int(_get(cp, "parity", "phi_points", "20"), "parity.phi_points")
    if parity_points < 4:
        raise ConfigError("parity.phi_points", "need at least 4 points")

    seed = parse_int(_get(cp, "run", "seed", "0"), "run.seed")
    out = _get(cp, "run", "out", "results")

    resolved = {s: dict(cp[s]) for s in cp.sections()}
    return RunConfig(
        species=species, trap=trap, field=field_params, gradients=gradients, noise=noise,
        n_trajectories=n_traj, crosstalk=crosstalk, detection_enabled=det_enabled,
        detection_targets=targets, rabi=rabi, n_echo=n_echo, pattern=pattern,
        phi_points=phi_points, repeats=repeats, spectrum_pulse_len=spec_len,
        spectrum_rabi=spec_rabi, spectrum_span=spec_span, spectrum_points=spec_points,
        scan_nu_axial=scan_nus, scan_gradient=scan_grad, scan_n_ions=scan_n,
        measure_pairs=pairs, measure_tau=measure_tau, cnot=cnot, parity=parity,
        parity_phi_points=parity_points, seed=seed, out=out, resolved=resolved,
    )


def _bool(cp, section, option, fallback):
    raw = _get(cp, section, option, fallback).strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{section}.{option}", f"not a boolean: {raw!r}")


def load_config(source="apparatus", overrides=None):
    """Load, merge includes, apply ``{section: {key: value}}`` overrides, validate."""
    cp = load_parser(source)
    if overrides:
        cp.read_dict(overrides)
    try:
        return build_config(cp)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("config", str(exc)) from None


def frequency_hz(omega):
    """rad/s to the ``2pi x Hz`` display value."""
    return omega / TWO_PI

