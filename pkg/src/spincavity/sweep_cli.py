"""Configuration-driven command line front end.

Experiments are described by INI files with [sample], [resonator] and [sweep]
sections; commands wire the physics modules together and emit flat CSV for
plotting, or fit reports as key = value blocks.  Unknown keys are rejected so
typos fail loudly instead of silently falling back to defaults.

Exit codes: 0 success, 2 configuration error, 3 fit failure or
non-convergence, 4 input/output or data-format error.
"""

import argparse
import configparser
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import cavity_qed, circuit_model, experiments, fitting, spin_models


class ConfigError(Exception):
    pass


class CsvError(Exception):
    pass


@dataclass(frozen=True)
class SampleConfig:
    defect: str
    density_ppm: float
    volume_mm3: float = experiments.SAMPLE1_VOLUME_MM3
    field_direction: tuple = (1, 1, 0)
    linewidth_mhz: float = 5.0
    orientation_fraction: float = 0.5
    nuclear_fraction: float = 1.0
    filling_factor: float = 1.0
    transition_weight: float = experiments.DEFAULT_TRANSITION_WEIGHT
    g_ens_mhz: float | None = None
    initial_levels: tuple = (0,)


@dataclass(frozen=True)
class ResonatorConfig:
    omega_r_mhz: float | None = None
    q_int: float = experiments.Q_INT
    q_ext1: float = 2.0 * experiments.Q_EXT_MIN
    q_ext2: float = 2.0 * experiments.Q_EXT_MIN
    mode_volume_mm3: float = experiments.MODE_VOLUME_MM3
    circuit: circuit_model.CircuitElements | None = None


@dataclass(frozen=True)
class SweepConfig:
    b_min_mt: float = 60.0
    b_max_mt: float = 90.0
    b_points: int = 61
    omega_min_mhz: float = 5340.0
    omega_max_mhz: float = 5440.0
    omega_points: int = 401
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    sample: SampleConfig | None
    resonator: ResonatorConfig | None
    sweep: SweepConfig


_SAMPLE_KEYS = {
    "defect",
    "density_ppm",
    "volume_mm3",
    "field_direction",
    "linewidth_mhz",
    "orientation_fraction",
    "nuclear_fraction",
    "filling_factor",
    "transition_weight",
    "g_ens_mhz",
    "initial_levels",
}
_RES_KEYS = {
    "omega_r_mhz",
    "q_int",
    "q_ext1",
    "q_ext2",
    "mode_volume_mm3",
    "l_nh",
    "c_pf",
    "r_ohm",
    "cc1_ff",
    "cc2_ff",
    "cx_ff",
    "z0_ohm",
}
_SWEEP_KEYS = {
    "b_min_mt",
    "b_max_mt",
    "b_points",
    "omega_min_mhz",
    "omega_max_mhz",
    "omega_points",
    "seed",
}
_CIRCUIT_REQUIRED = ("l_nh", "c_pf", "r_ohm", "cc1_ff", "cc2_ff")


def _reject_unknown(section, items, allowed):
    for key in items:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in section [{section}]")


def _float(section, items, key, default=None, lo=None, hi=None, required=False):
    if key not in items:
        if required:
            raise ConfigError(f"missing required key '{key}' in section [{section}]")
        return default
    try:
        v = float(items[key])
    except ValueError:
        raise ConfigError(f"key '{key}' in [{section}] is not a number: {items[key]!r}")
    if lo is not None and v < lo or hi is not None and v > hi:
        raise ConfigError(f"key '{key}' in [{section}] out of range: {v:g}")
    return v


def _int(section, items, key, default=None, lo=None, required=False):
    if key not in items:
        if required:
            raise ConfigError(f"missing required key '{key}' in section [{section}]")
        return default
    try:
        v = int(items[key])
    except ValueError:
        raise ConfigError(f"key '{key}' in [{section}] is not an integer: {items[key]!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"key '{key}' in [{section}] out of range: {v}")
    return v


def _int_triple(section, items, key, default):
    if key not in items:
        return default
    parts = items[key].replace(",", " ").split()
    try:
        triple = tuple(int(p) for p in parts)
    except ValueError:
        triple = ()
    if len(triple) != 3 or all(t == 0 for t in triple):
        raise ConfigError(
            f"key '{key}' in [{section}] must be three Miller indices, got {items[key]!r}"
        )
    return triple


def parse_config(text):
    """Parse and validate INI config text into an ExperimentConfig."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}")
    for section in cp.sections():
        if section not in ("sample", "resonator", "sweep"):
            raise ConfigError(f"unknown section [{section}]")

    sample = None
    if cp.has_section("sample"):
        items = dict(cp.items("sample"))
        _reject_unknown("sample", items, _SAMPLE_KEYS)
        if "defect" not in items:
            raise ConfigError("missing required key 'defect' in section [sample]")
        defect = items["defect"].strip().upper()
        if defect not in ("NV", "P1"):
            raise ConfigError(f"defect must be NV or P1, got {items['defect']!r}")
        levels_raw = items.get("initial_levels", "0").replace(",", " ").split()
        try:
            initial_levels = tuple(int(p) for p in levels_raw)
        except ValueError:
            raise ConfigError("key 'initial_levels' in [sample] must be integers")
        nuclear_default = 1.0 if defect == "NV" else 1.0 / 3.0
        sample = SampleConfig(
            defect=defect,
            density_ppm=_float("sample", items, "density_ppm", lo=0.0, required=True),
            volume_mm3=_float(
                "sample", items, "volume_mm3", experiments.SAMPLE1_VOLUME_MM3, lo=0.0
            ),
            field_direction=_int_triple("sample", items, "field_direction", (1, 1, 0)),
            linewidth_mhz=_float("sample", items, "linewidth_mhz", 5.0, lo=1e-9),
            orientation_fraction=_float(
                "sample", items, "orientation_fraction", 0.5, lo=0.0, hi=1.0
            ),
            nuclear_fraction=_float(
                "sample", items, "nuclear_fraction", nuclear_default, lo=0.0, hi=1.0
            ),
            filling_factor=_float("sample", items, "filling_factor", 1.0, lo=0.0, hi=1.0),
            transition_weight=_float(
                "sample", items, "transition_weight",
                experiments.DEFAULT_TRANSITION_WEIGHT, lo=0.0,
            ),
            g_ens_mhz=_float("sample", items, "g_ens_mhz", None, lo=0.0),
            initial_levels=initial_levels,
        )

    resonator = None
    if cp.has_section("resonator"):
        items = dict(cp.items("resonator"))
        _reject_unknown("resonator", items, _RES_KEYS)
        circuit = None
        if any(k in items for k in _CIRCUIT_REQUIRED):
            for k in _CIRCUIT_REQUIRED:
                if k not in items:
                    raise ConfigError(
                        f"missing required key '{k}' in section [resonator] (circuit mode)"
                    )
            try:
                circuit = circuit_model.CircuitElements(
                    l=_float("resonator", items, "l_nh", required=True),
                    c=_float("resonator", items, "c_pf", required=True),
                    r_loss=_float("resonator", items, "r_ohm", required=True),
                    cc1=_float("resonator", items, "cc1_ff", required=True),
                    cc2=_float("resonator", items, "cc2_ff", required=True),
                    cx=_float("resonator", items, "cx_ff", 0.0),
                    z0=_float("resonator", items, "z0_ohm", 50.0),
                )
            except ValueError as exc:
                raise ConfigError(f"invalid circuit elements in [resonator]: {exc}")
        resonator = ResonatorConfig(
            omega_r_mhz=_float("resonator", items, "omega_r_mhz", None, lo=1e-9),
            q_int=_float("resonator", items, "q_int", experiments.Q_INT, lo=1e-9),
            q_ext1=_float(
                "resonator", items, "q_ext1", 2.0 * experiments.Q_EXT_MIN, lo=1e-9
            ),
            q_ext2=_float(
                "resonator", items, "q_ext2", 2.0 * experiments.Q_EXT_MIN, lo=1e-9
            ),
            mode_volume_mm3=_float(
                "resonator", items, "mode_volume_mm3", experiments.MODE_VOLUME_MM3, lo=1e-12
            ),
            circuit=circuit,
        )

    items = dict(cp.items("sweep")) if cp.has_section("sweep") else {}
    if items:
        _reject_unknown("sweep", items, _SWEEP_KEYS)
    sweep = SweepConfig(
        b_min_mt=_float("sweep", items, "b_min_mt", 60.0),
        b_max_mt=_float("sweep", items, "b_max_mt", 90.0),
        b_points=_int("sweep", items, "b_points", 61, lo=2),
        omega_min_mhz=_float("sweep", items, "omega_min_mhz", 5340.0),
        omega_max_mhz=_float("sweep", items, "omega_max_mhz", 5440.0),
        omega_points=_int("sweep", items, "omega_points", 401, lo=2),
        seed=_int("sweep", items, "seed", 0),
    )
    if sweep.b_min_mt >= sweep.b_max_mt:
        raise ConfigError("b_min_mt must be smaller than b_max_mt in section [sweep]")
    if sweep.omega_min_mhz >= sweep.omega_max_mhz:
        raise ConfigError("omega_min_mhz must be smaller than omega_max_mhz in [sweep]")
    return ExperimentConfig(sample, resonator, sweep)


def dump_config(cfg):
    """Canonical INI text; floats printed with repr so re-parsing is exact."""
    lines = []
    if cfg.sample is not None:
        s = cfg.sample
        lines.append("[sample]")
        lines.append(f"defect = {s.defect}")
        lines.append(f"density_ppm = {s.density_ppm!r}")
        lines.append(f"volume_mm3 = {s.volume_mm3!r}")
        lines.append("field_direction = " + " ".join(str(i) for i in s.field_direction))
        lines.append(f"linewidth_mhz = {s.linewidth_mhz!r}")
        lines.append(f"orientation_fraction = {s.orientation_fraction!r}")
        lines.append(f"nuclear_fraction = {s.nuclear_fraction!r}")
        lines.append(f"filling_factor = {s.filling_factor!r}")
        lines.append(f"transition_weight = {s.transition_weight!r}")
        if s.g_ens_mhz is not None:
            lines.append(f"g_ens_mhz = {s.g_ens_mhz!r}")
        lines.append("initial_levels = " + " ".join(str(i) for i in s.initial_levels))
        lines.append("")
    if cfg.resonator is not None:
        r = cfg.resonator
        lines.append("[resonator]")
        if r.omega_r_mhz is not None:
            lines.append(f"omega_r_mhz = {r.omega_r_mhz!r}")
        lines.append(f"q_int = {r.q_int!r}")
        lines.append(f"q_ext1 = {r.q_ext1!r}")
        lines.append(f"q_ext2 = {r.q_ext2!r}")
        lines.append(f"mode_volume_mm3 = {r.mode_volume_mm3!r}")
        if r.circuit is not None:
            c = r.circuit
            lines.append(f"l_nh = {c.l!r}")
            lines.append(f"c_pf = {c.c!r}")
            lines.append(f"r_ohm = {c.r_loss!r}")
            lines.append(f"cc1_ff = {c.cc1!r}")
            lines.append(f"cc2_ff = {c.cc2!r}")
            lines.append(f"cx_ff = {c.cx!r}")
            lines.append(f"z0_ohm = {c.z0!r}")
        lines.append("")
    w = cfg.sweep
    lines.append("[sweep]")
    lines.append(f"b_min_mt = {w.b_min_mt!r}")
    lines.append(f"b_max_mt = {w.b_max_mt!r}")
    lines.append(f"b_points = {w.b_points}")
    lines.append(f"omega_min_mhz = {w.omega_min_mhz!r}")
    lines.append(f"omega_max_mhz = {w.omega_max_mhz!r}")
    lines.append(f"omega_points = {w.omega_points}")
    lines.append(f"seed = {w.seed}")
    lines.append("")
    return "\n".join(lines)


def _require(cfg, part, command):
    value = getattr(cfg, part)
    if value is None:
        raise ConfigError(f"command '{command}' needs a [{part}] section in the config")
    return value


def _defect_axis(direction):
    """Bond orientation best aligned with the field (first on ties)."""
    bonds = spin_models.bond_orientations()
    cosines = np.abs(bonds @ direction)
    return bonds[int(np.argmax(np.round(cosines, 12)))]


def _field_setup(sample):
    direction = np.asarray(sample.field_direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    return direction, _defect_axis(direction)


def _resonator_mode(res):
    if res.omega_r_mhz is not None:
        f = res.omega_r_mhz
        return cavity_qed.ResonatorMode(f, f / res.q_int, f / res.q_ext1, f / res.q_ext2)
    if res.circuit is not None:
        if res.circuit.cx != 0:
            raise ConfigError(
                "cannot derive a resonator mode from a circuit with crosstalk; "
                "give omega_r_mhz explicitly"
            )
        f0, q_int, q_e1, q_e2 = circuit_model.q_decomposition(res.circuit)
        return cavity_qed.ResonatorMode(f0, f0 / q_int, f0 / q_e1, f0 / q_e2)
    raise ConfigError("section [resonator] needs omega_r_mhz or circuit elements")


def _budget(sample, res_mode, mode_volume):
    return experiments.coupling_budget(
        density_ppm=sample.density_ppm,
        volume_mm3=sample.volume_mm3,
        orientation_fraction=sample.orientation_fraction,
        nuclear_fraction=sample.nuclear_fraction,
        filling_factor=sample.filling_factor,
        omega_r=res_mode.omega_r,
        mode_volume_mm3=mode_volume,
        transition_weight=sample.transition_weight,
    )


def _line_coupling(sample, res_mode, mode_volume):
    if sample.g_ens_mhz is not None:
        return sample.g_ens_mhz
    return _budget(sample, res_mode, mode_volume)["g_ens_mhz"]


def _transition_curves(cfg, b_grid, res_mode):
    """Per-field SpinLine lists for the configured defect."""
    sample = cfg.sample
    direction, axis = _field_setup(sample)
    g = _line_coupling(sample, res_mode, cfg.resonator.mode_volume_mm3)
    curves = spin_models.level_curve(sample.defect.lower(), direction, axis, b_grid)
    e = curves.energies
    if sample.defect == "NV":
        pairs = [(0, e.shape[1] - 1)]
    else:
        pairs = [(k, e.shape[1] - 1 - k) for k in range(3)]
    out = []
    for i in range(b_grid.size):
        out.append(
            [
                cavity_qed.SpinLine(abs(e[i, hi] - e[i, lo]), sample.linewidth_mhz, g)
                for lo, hi in pairs
            ]
        )
    return out


def _b_grid(sweep):
    return np.linspace(sweep.b_min_mt, sweep.b_max_mt, sweep.b_points)


def _omega_grid(sweep):
    return np.linspace(sweep.omega_min_mhz, sweep.omega_max_mhz, sweep.omega_points)


def _write(out_path, text):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _fmt(x):
    return f"{x:.10g}"


def cmd_levels(cfg, args):
    sample = _require(cfg, "sample", "levels")
    direction, axis = _field_setup(sample)
    grid = _b_grid(cfg.sweep)
    curves = spin_models.level_curve(sample.defect.lower(), direction, axis, grid)
    dim = curves.energies.shape[1]
    rows = ["B_mT," + ",".join(f"E{k}_MHz" for k in range(dim))]
    for i, b in enumerate(grid):
        rows.append(_fmt(b) + "," + ",".join(_fmt(v) for v in curves.energies[i]))
    _write(args.out, "\n".join(rows) + "\n")
    return 0


def cmd_transitions(cfg, args):
    sample = _require(cfg, "sample", "transitions")
    direction, axis = _field_setup(sample)
    build = (
        spin_models.build_nv_hamiltonian
        if sample.defect == "NV"
        else spin_models.build_p1_hamiltonian
    )
    rows = ["B_mT,f_MHz,weight,from_level,to_level"]
    for b in _b_grid(cfg.sweep):
        eig = spin_models.eigensystem(build(b * direction, axis))
        for line in spin_models.transition_spectrum(eig, initial_levels=sample.initial_levels):
            rows.append(
                f"{_fmt(b)},{_fmt(line.freq)},{_fmt(line.weight)},"
                f"{line.from_index},{line.to_index}"
            )
    _write(args.out, "\n".join(rows) + "\n")
    return 0


def _synthesize_map(cfg, noise, threads):
    _require(cfg, "sample", "map")
    res_mode = _resonator_mode(_require(cfg, "resonator", "map"))
    b_grid = _b_grid(cfg.sweep)
    omega_grid = _omega_grid(cfg.sweep)
    curves = _transition_curves(cfg, b_grid, res_mode)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(lambda ln: cavity_qed.s21_spectrum(omega_grid, res_mode, ln), curves)
            )
        smap = cavity_qed.SpectrumMap(b_grid, omega_grid, np.array(rows))
    else:
        smap = cavity_qed.s21_map(b_grid, omega_grid, res_mode, curves)
    if noise:
        smap = experiments.add_magnitude_noise(smap, noise, cfg.sweep.seed)
    return smap


def cmd_map(cfg, args):
    _require(cfg, "sample", "map")
    smap = _synthesize_map(cfg, args.noise, args.threads)
    rows = ["B_mT,f_MHz,S21_mag,S21_arg"]
    for i, b in enumerate(smap.b_axis):
        for j, f in enumerate(smap.omega_axis):
            v = smap.values[i, j]
            rows.append(f"{_fmt(b)},{_fmt(f)},{_fmt(abs(v))},{_fmt(np.angle(v))}")
    _write(args.out, "\n".join(rows) + "\n")
    return 0


def cmd_budget(cfg, args):
    sample = _require(cfg, "sample", "budget")
    res = _require(cfg, "resonator", "budget")
    res_mode = _resonator_mode(res)
    budget = _budget(sample, res_mode, res.mode_volume_mm3)
    text = [
        "# coupling budget",
        f"# B_rms = sqrt(mu0 h f / 2V): f = {res_mode.omega_r:g} MHz, "
        f"V = {res.mode_volume_mm3:g} mm^3",
        f"# g_single = gamma_e B_rms sqrt(w): gamma_e = {spin_models.GAMMA_E:g} MHz/mT, "
        f"w = {sample.transition_weight:g}",
        f"# N = n_C V_s c * orientation * nuclear: V_s = {sample.volume_mm3:g} mm^3, "
        f"c = {sample.density_ppm:g} ppm, orientation = {sample.orientation_fraction:g}, "
        f"nuclear = {sample.nuclear_fraction:g}",
        f"# g_ens = g_single sqrt(N * filling): filling = {sample.filling_factor:g}",
        f"brms_pt = {budget['brms_pt']:.6g}",
        f"g_single_hz = {budget['g_single_hz']:.6g}",
        f"n_spins = {budget['n_spins']:.6g}",
        f"g_ens_mhz = {budget['g_ens_mhz']:.6g}",
    ]
    _write(args.out, "\n".join(text) + "\n")
    return 0


def _read_csv(path, expected_header):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CsvError(f"cannot read {path}: {exc}")
    if not lines:
        raise CsvError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if header[: len(expected_header)] != list(expected_header):
        raise CsvError(
            f"{path}: line 1: expected header starting with {','.join(expected_header)}"
        )
    rows = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise CsvError(f"{path}: line {n}: expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise CsvError(f"{path}: line {n}: non-numeric field")
    if not rows:
        raise CsvError(f"{path}: no data rows")
    return np.array(rows)


def _map_from_csv(path):
    data = _read_csv(path, ("B_mT", "f_MHz", "S21_mag"))
    b_vals = data[:, 0]
    b_axis, first_index = np.unique(b_vals, return_index=True)
    b_axis = b_vals[np.sort(first_index)]
    n_b = b_axis.size
    if data.shape[0] % n_b != 0:
        raise CsvError(f"{path}: map is not rectangular")
    n_w = data.shape[0] // n_b
    omega_axis = data[:n_w, 1]
    mag = data[:, 2].reshape(n_b, n_w)
    arg = data[:, 3].reshape(n_b, n_w) if data.shape[1] > 3 else np.zeros_like(mag)
    for i in range(n_b):
        block = data[i * n_w : (i + 1) * n_w]
        if not np.array_equal(block[:, 1], omega_axis) or not np.all(block[:, 0] == b_axis[i]):
            raise CsvError(f"{path}: line {2 + i * n_w}: inconsistent grid block")
    values = mag * np.exp(1j * arg)
    return cavity_qed.SpectrumMap(b_axis, omega_axis, values)


def _trace_from_csv(path):
    data = _read_csv(path, ("f_MHz", "S21_mag"))
    return fitting.Spectrum1D(data[:, 0], data[:, 1])


def _synthesize_trace(cfg, noise):
    res = _require(cfg, "resonator", "fit")
    if res.circuit is not None:
        grid, s21 = experiments.loop_gap_trace(res.circuit)
        mag = np.abs(s21)
    else:
        res_mode = _resonator_mode(res)
        grid = _omega_grid(cfg.sweep)
        mag = np.abs(cavity_qed.s21_spectrum(grid, res_mode, []))
    if noise:
        rng = np.random.default_rng(cfg.sweep.seed)
        mag = np.clip(mag + rng.normal(0.0, noise, mag.shape), 0.0, None)
    return fitting.Spectrum1D(grid, mag)


def _report_lines(title, params, result):
    out = [f"# {title}"]
    out += [f"# residual rms {result.residual_rms:.3e}, {result.iterations} iterations"]
    out += [f"{k} = {v:.8g}" for k, v in params.items()]
    out.append(f"residual_rms = {result.residual_rms:.8g}")
    out.append(f"converged = {'true' if result.converged else 'false'}")
    out.append(f"iterations = {result.iterations}")
    return out


def cmd_fit(cfg, args):
    if args.kind == "avoided_crossing":
        smap = _map_from_csv(args.infile) if args.infile else _synthesize_map(
            cfg, args.noise, args.threads
        )
        result = fitting.fit_avoided_crossing(smap)
        p = result.params
        text = _report_lines(
            "avoided-crossing fit",
            {
                "g_ens_mhz": p["g_ens"],
                "omega_r_mhz": p["omega_r"],
                "b_star_mt": p["b_star"],
                "slope_mhz_per_mt": p["slope"],
            },
            result,
        )
    else:
        spec = _trace_from_csv(args.infile) if args.infile else _synthesize_trace(cfg, args.noise)
        if args.kind == "lorentzian":
            result = fitting.fit_lorentzian(spec)
            p = result.params
            named = {
                "center_mhz": p["center"],
                "fwhm_mhz": p["fwhm"],
                "amplitude": p["amplitude"],
                "baseline": p["baseline"],
                "q_loaded": p["center"] / p["fwhm"],
            }
            peak = p["amplitude"] + p["baseline"]
            if 0.0 < peak < 1.0:
                qs = fitting.extract_qs(result, peak)
                named["q_ext"] = qs["q_ext"]
                named["q_int"] = qs["q_int"]
            text = _report_lines("lorentzian fit", named, result)
        else:
            result = fitting.fit_fano(spec)
            p = result.params
            text = _report_lines(
                "fano fit",
                {
                    "center_mhz": p["center"],
                    "width_mhz": p["width"],
                    "q_asym": p["q_asym"],
                    "amplitude": p["amplitude"],
                    "baseline": p["baseline"],
                },
                result,
            )
    _write(args.out, "\n".join(text) + "\n")
    return 0 if result.converged else 3


def cmd_circuit(cfg, args):
    res = _require(cfg, "resonator", "circuit")
    if res.circuit is None:
        raise ConfigError("command 'circuit' needs circuit elements in [resonator]")
    grid, s21 = experiments.loop_gap_trace(res.circuit)
    rows = ["f_MHz,S21_mag,S21_arg"]
    for f, v in zip(grid, s21):
        rows.append(f"{_fmt(f)},{_fmt(abs(v))},{_fmt(np.angle(v))}")
    _write(args.out, "\n".join(rows) + "\n")
    if args.out is not None and res.circuit.cx == 0:
        f0, q_int, q_e1, q_e2 = circuit_model.q_decomposition(res.circuit)
        sys.stdout.write(
            f"omega_0_mhz = {f0:.8g}\nq_int = {q_int:.8g}\n"
            f"q_ext1 = {q_e1:.8g}\nq_ext2 = {q_e2:.8g}\n"
        )
    return 0


def cmd_config_dump(cfg, args):
    _write(args.out, dump_config(cfg))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spincavity",
        description="Spin-ensemble / microwave-resonator forward models and fits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, helptext, noise=False, threads=False, fit=False):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="INI config path")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if noise:
            p.add_argument("--noise", type=float, default=0.0, metavar="SIGMA",
                           help="additive Gaussian noise on |S21|, seeded from the config")
        if threads:
            p.add_argument("--threads", type=int, default=1, metavar="N",
                           help="worker threads for map rows")
        if fit:
            p.add_argument("--kind", default="avoided_crossing",
                           choices=("avoided_crossing", "lorentzian", "fano"))
            p.add_argument("--in", dest="infile", default=None,
                           help="CSV input (otherwise synthesized from the config)")
        p.set_defaults(func=func)
        return p

    add("levels", cmd_levels, "adiabatically tracked energy levels vs field")
    add("transitions", cmd_transitions, "ESR lines and weights vs field")
    add("map", cmd_map, "transmission map over the (B, f) sweep grid",
        noise=True, threads=True)
    add("fit", cmd_fit, "fit a map or trace, synthetic or from CSV",
        noise=True, threads=True, fit=True)
    add("budget", cmd_budget, "coupling-constant budget report")
    add("circuit", cmd_circuit, "lumped-element resonator trace and Q values")

    pc = sub.add_parser("config", help="configuration utilities")
    pcsub = pc.add_subparsers(dest="subcommand", required=True)
    pdump = pcsub.add_parser("dump", help="echo the parsed config in canonical form")
    pdump.add_argument("--config", required=True)
    pdump.add_argument("--out", default=None)
    pdump.set_defaults(func=cmd_config_dump)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        sys.stderr.write(f"error: cannot read config: {exc}\n")
        return 4
    try:
        cfg = parse_config(text)
        return args.func(cfg, args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except fitting.FitError as exc:
        sys.stderr.write(f"fit error: {exc}\n")
        return 3
    except CsvError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 4
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
