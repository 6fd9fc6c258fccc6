"""Batch front-end that writes plot-ready CSV and JSON result files.

Usage::

    pseudomolecule jmatrix --config my.ini --out results
    pseudomolecule parity --seed 7 --no-timestamp

Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import datetime
import functools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import check_pair, load_config
from .constants import TWO_PI
from .coupling import j_matrix, j_vs_trap_scan, kappa_matrix, loglog_slope
from .crystal import axial_normal_modes, linear_chain_stable, min_spacing
from .errors import ConfigError, InstabilityError, PseudomoleculeError
from .experiments import (
    Setup,
    bell_fidelity,
    calibrate_detection,
    cnot_truth_table,
    default_tau,
    measure_j,
    parity_scan,
)
from .experiments.protocols import PREPARATIONS, default_phis
from .field import ion_frequencies, microwave_spectrum, spectrum_peaks
from .spinsim import CrosstalkModel
from .spinsim.state import MAX_QUBITS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

COMMANDS = ("crystal", "jmatrix", "scan-j", "spectrum", "measure-j", "cnot", "parity")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


class Writer:
    """Writes one JSON document and any number of CSV tables per command."""

    def __init__(self, out_dir, command, cfg, timestamp=True):
        self.out = Path(out_dir)
        self.command = command
        self.cfg = cfg
        self.timestamp = timestamp
        self.files = []

    @property
    def config(self):
        # the output directory is where results go, not an input to them
        cfg = {k: dict(v) for k, v in self.cfg.resolved.items()}
        cfg.get("run", {}).pop("out", None)
        return cfg

    def _header(self):
        return {
            "command": self.command,
            "seed": self.cfg.seed,
            "config": self.config,
            "version": __version__,
        }

    def table(self, name, columns, rows):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"{self.command.replace('-', '_')}_{name}.csv"
        with open(path, "w", newline="") as fh:
            fh.write(f"# seed: {self.cfg.seed}\n")
            fh.write("# config: " + json.dumps(self.config, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(columns)
            for row in rows:
                w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                            for v in row])
        self.files.append(path)
        return path

    def document(self, results):
        self.out.mkdir(parents=True, exist_ok=True)
        doc = dict(self._header(), results=_jsonable(results))
        if self.timestamp:
            doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        path = self.out / f"{self.command.replace('-', '_')}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        self.files.append(path)
        return path


@functools.lru_cache(maxsize=8)
def _detection(targets):
    return calibrate_detection(targets)


def _modes(cfg):
    if not linear_chain_stable(cfg.trap):
        raise InstabilityError("nu_radial/nu_axial below the linear-chain threshold (zigzag)")
    return axial_normal_modes(cfg.trap, cfg.species)


def _physics(cfg):
    modes = _modes(cfg)
    freqs = ion_frequencies(modes, cfg.field, cfg.species)
    gradients = freqs.gradient_at_ion if cfg.gradients is None else cfg.gradients
    return modes, freqs, gradients


def _setup(cfg):
    if cfg.trap.n_ions > MAX_QUBITS:
        raise ConfigError("trap.n_ions", f"spin simulation supports at most {MAX_QUBITS} ions")
    modes, freqs, gradients = _physics(cfg)
    jm = j_matrix(modes, gradients, cfg.species)
    detection = _detection(cfg.detection_targets) if cfg.detection_enabled else None
    crosstalk = CrosstalkModel.from_frequencies(freqs) if cfg.crosstalk else None
    setup = Setup(jm.j, cfg.noise, crosstalk, detection, cfg.n_trajectories, cfg.rabi)
    return setup, jm


def _repeats(cfg, ideal):
    return None if ideal else cfg.repeats


def cmd_crystal(cfg, writer, ideal=False):
    modes = _modes(cfg)
    z_um = modes.positions * 1e6
    spacing = list(np.diff(z_um)) + [None]
    writer.table("positions", ["ion", "z[um]", "spacing_to_next[um]"],
                 [(i + 1, z_um[i], spacing[i]) for i in range(len(z_um))])
    n = modes.n_ions
    writer.table(
        "modes",
        ["mode", "nu[2pi*kHz]"] + [f"S_n{l + 1}" for l in range(n)],
        [(k + 1, modes.mode_freqs[k] / TWO_PI / 1e3, *modes.mode_matrix[k]) for k in range(n)],
    )
    results = {
        "positions_um": z_um,
        "spacings_um": np.diff(z_um),
        "mode_freqs_2pi_kHz": modes.mode_freqs / TWO_PI / 1e3,
        "mode_matrix": modes.mode_matrix,
        "linear_chain_stable": linear_chain_stable(cfg.trap),
    }
    if n >= 2:
        results["min_spacing_formula_um"] = min_spacing(cfg.trap, cfg.species) * 1e6
    writer.document(results)
    return results


def cmd_jmatrix(cfg, writer, ideal=False):
    modes, freqs, gradients = _physics(cfg)
    jm = j_matrix(modes, gradients, cfg.species)
    kappa = kappa_matrix(modes, gradients, cfg.species).kappa
    n = modes.n_ions
    offsets = (freqs.omega - cfg.species.hyperfine_splitting) / TWO_PI / 1e6
    writer.table(
        "ions",
        ["ion", "z[um]", "b[T/m]", "resonance_offset[2pi*MHz]"],
        [(l + 1, modes.positions[l] * 1e6, gradients[l], offsets[l]) for l in range(n)],
    )
    writer.table(
        "pairs",
        ["i", "j", "J[2pi*Hz]", "J[rad/s]"],
        [(a + 1, b + 1, jm.j_hz[a, b], jm.j[a, b]) for a in range(n) for b in range(a + 1, n)],
    )
    writer.table("kappa", ["mode"] + [f"kappa_n{l + 1}" for l in range(n)],
                 [(k + 1, *kappa[k]) for k in range(n)])
    results = {
        "gradients_T_per_m": gradients,
        "gradient_source": "computed" if cfg.gradients is None else "configured",
        "resonance_offset_2pi_MHz": offsets,
        "J_2pi_Hz": jm.j_hz,
        "J_rad_per_s": jm.j,
        "kappa": kappa,
    }
    writer.document(results)
    return results


def cmd_scan_j(cfg, writer, ideal=False):
    scan = j_vs_trap_scan(cfg.scan_nu_axial, cfg.scan_gradient, cfg.scan_n_ions, cfg.species)
    n = cfg.scan_n_ions
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    writer.table(
        "curve",
        ["nu_axial[2pi*kHz]"] + [f"J_{a + 1}{b + 1}[2pi*Hz]" for a, b in pairs],
        [(nu / TWO_PI / 1e3, *[scan.j[k, a, b] / TWO_PI for a, b in pairs])
         for k, nu in enumerate(scan.nu_axial)],
    )
    results = {"nu_axial_2pi_kHz": scan.nu_axial / TWO_PI / 1e3,
               "J_2pi_Hz": scan.j / TWO_PI, "gradient_T_per_m": cfg.scan_gradient}
    if len(scan.nu_axial) >= 2:
        results["loglog_slope_J12"] = loglog_slope(scan.nu_axial, scan.pair(0, 1))
    writer.document(results)
    return results


def cmd_spectrum(cfg, writer, ideal=False):
    modes, freqs, _ = _physics(cfg)
    center = float(np.mean(freqs.omega))
    drive = center + np.linspace(-0.5, 0.5, cfg.spectrum_points) * cfg.spectrum_span
    spec = microwave_spectrum(freqs, cfg.spectrum_rabi, cfg.spectrum_pulse_len, drive)
    ref = cfg.species.hyperfine_splitting
    n = modes.n_ions
    writer.table(
        "spectrum",
        ["drive_offset[2pi*MHz]"] + [f"P_up_ion{l + 1}" for l in range(n)] + ["bright_ions"],
        [((d - ref) / TWO_PI / 1e6, *spec.per_ion[k], spec.total[k]) for k, d in enumerate(drive)],
    )
    peaks = (spectrum_peaks(spec) - ref) / TWO_PI / 1e6
    results = {
        "peaks_2pi_MHz": peaks,
        "peak_spacing_2pi_MHz": np.diff(peaks),
        "resonance_offset_2pi_MHz": (freqs.omega - ref) / TWO_PI / 1e6,
        "pulse_len_s": cfg.spectrum_pulse_len,
        "rabi_2pi_kHz": cfg.spectrum_rabi / TWO_PI / 1e3,
    }
    writer.document(results)
    return results


def cmd_measure_j(cfg, writer, ideal=False):
    setup, jm = _setup(cfg)
    fringe_rows, rows, out = [], [], []
    for a, b in cfg.measure_pairs:
        check_pair((a, b), setup.n_ions, "measure_j.pairs")
        tau = cfg.measure_tau or default_tau(jm.j[a, b])
        res = measure_j(setup, a, b, tau, cfg.n_echo, cfg.pattern, default_phis(cfg.phi_points),
                        _repeats(cfg, ideal), cfg.seed)
        label = f"{a + 1}-{b + 1}"
        rows.append((label, tau, res.j_estimate_hz, jm.j_hz[a, b], res.delta_phi, res.ambiguous))
        fringe_rows += [(label, phi, pd, pu) for phi, pd, pu in zip(res.phis, res.p_down, res.p_up)]
        out.append({"pair": [a + 1, b + 1], "tau_s": tau, "J_measured_2pi_Hz": res.j_estimate_hz,
                    "J_calculated_2pi_Hz": jm.j_hz[a, b], "delta_phi_rad": res.delta_phi,
                    "phase_ambiguous": res.ambiguous})
    writer.table("summary", ["pair", "tau[s]", "J_measured[2pi*Hz]", "J_calculated[2pi*Hz]",
                             "delta_phi[rad]", "phase_ambiguous"], rows)
    writer.table("fringes", ["pair", "phi[rad]", "P_up_control_down", "P_up_control_up"],
                 fringe_rows)
    results = {"pairs": out, "exact_probabilities": ideal, **_model_meta(setup)}
    writer.document(results)
    return results


def _model_meta(setup):
    meta = {
        "noise": {"kind": setup.noise.kind, "sigma_rad_per_s": setup.noise.sigma,
                  "tau_c_s": setup.noise.tau_c, "dt_s": setup.noise.dt,
                  "trajectories": setup.n_trajectories},
        "crosstalk": setup.crosstalk is not None,
    }
    if setup.detection is not None:
        meta["detection"] = setup.detection.to_dict()
        meta["detection"]["note"] = ("calibrated to the correct-classification rates; "
                                     "not a measured photon-count model")
    return meta


def cmd_cnot(cfg, writer, ideal=False):
    setup, jm = _setup(cfg)
    control, target = check_pair(cfg.cnot.pair, setup.n_ions, "cnot.pair")
    tau = cfg.cnot.tau or math.pi / (2 * abs(jm.j[control, target]))
    phis = default_phis(cfg.phi_points)
    res = cnot_truth_table(setup, control, target, tau, phis, cfg.n_echo, cfg.pattern,
                           _repeats(cfg, ideal), cfg.seed)
    names = ["".join("u" if s == "up" else "d" for s in p) for p in PREPARATIONS]
    writer.table("fringes", ["phi[rad]"] + [f"P_up_target_{n}" for n in names],
                 [(phi, *[res.curves[p][k] for p in PREPARATIONS]) for k, phi in enumerate(phis)])
    writer.table("truth_table", ["input(control,target)"] + [f"P_out_{n}" for n in names],
                 [(names[k], *res.truth_table[k]) for k in range(4)])
    results = {
        "pair": [control + 1, target + 1], "tau_s": tau,
        "phase_shift_rad": res.phase_shift, "contrast": res.contrast,
        "truth_table": res.truth_table, "truth_table_order": names,
        "exact_probabilities": ideal, **_model_meta(setup),
    }
    writer.document(results)
    return results


def cmd_parity(cfg, writer, ideal=False):
    setup, jm = _setup(cfg)
    control, target = check_pair(cfg.parity.pair, setup.n_ions, "parity.pair")
    tau = cfg.parity.tau or math.pi / (2 * abs(jm.j[control, target]))
    phis = default_phis(cfg.parity_phi_points)
    res = parity_scan(setup, control, target, tau, phis, cfg.n_echo, cfg.pattern,
                      _repeats(cfg, ideal), cfg.seed)
    writer.table("scan", ["phi[rad]", "parity"], list(zip(res.phis, res.parity)))
    fidelity, entangled = bell_fidelity(res.pi_z, res.visibility)
    results = {
        "pair": [control + 1, target + 1], "tau_s": tau, "pi_z": res.pi_z,
        "visibility": res.visibility, "fidelity": fidelity, "entangled": entangled,
        "exact_probabilities": ideal, **_model_meta(setup),
    }
    writer.document(results)
    return results


HANDLERS = {
    "crystal": cmd_crystal,
    "jmatrix": cmd_jmatrix,
    "scan-j": cmd_scan_j,
    "spectrum": cmd_spectrum,
    "measure-j": cmd_measure_j,
    "cnot": cmd_cnot,
    "parity": cmd_parity,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="apparatus",
                        help="INI file or builtin name (default: apparatus)")
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--out", help="override run.out (output directory)")
    common.add_argument("--ideal", action="store_true",
                        help="noise, detection errors and shot noise off")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp so identical runs give identical files")
    parser = argparse.ArgumentParser(prog="pseudomolecule", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HANDLERS[name].__name__.replace("cmd_", ""))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        if args.seed is not None:
            overrides.setdefault("run", {})["seed"] = str(args.seed)
        if args.out is not None:
            overrides.setdefault("run", {})["out"] = args.out
        cfg = load_config(args.config, overrides)
        if args.ideal:
            cfg = cfg.with_ideal()
        writer = Writer(cfg.out, args.command, cfg, timestamp=not args.no_timestamp)
        HANDLERS[args.command](cfg, writer, ideal=args.ideal)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PseudomoleculeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in writer.files:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
