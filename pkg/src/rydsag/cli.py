"""Command-line runner: config loading, dispatch and result emission.

Experiments are described by a single JSON config with strict unknown-key
rejection; every run writes its data files plus a manifest (full config
echo, seed, package versions, wall time) into one output directory.
Errors are serialized as machine-readable JSON on stdout with a nonzero
exit status.

Subcommands:
  simulate <config> [--output-dir D] [--seed N] [--threads N]
  validate <config>
  schema <experiment>

Output directory precedence: --output-dir flag, then the
RYDSAG_OUTPUT_DIR environment variable, then the config's output_dir,
then the working directory.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields

import numpy as np
import scipy

from . import __version__
from .detector_chain import DetectorParams
from .eit_medium import (
    LadderSystemParams,
    at_splitting,
    detuning_grid,
    kk_residual,
    phase_and_absorption,
    susceptibility_spectrum,
)
from .emit import write_csv, write_json
from .errors import (
    ConfigError,
    GridPolicyError,
    SimulationError,
    UnresolvedSplittingError,
)
from .heterodyne import (
    HeterodyneConfig,
    comparison_from_points,
    min_detectable_field,
    sensitivity_sweep,
)
from .heterodyne import calibration_curve as _calibration_curve
from .noise_limits import CellGeometry, LimitInputs, limits_report
from .stabilization import (
    DriftModel,
    PidParams,
    equivalent_phase_deviation,
    simulate_closed_loop_detailed,
    suppression_report,
)
from .weak_pointer import (
    BeamPointer,
    PointerSetup,
    PostSelection,
    PreSelection,
    WeakCoupling,
    quadrature_oracle,
)

OUTPUT_DIR_ENV = "RYDSAG_OUTPUT_DIR"

EXPERIMENTS = (
    "spectrum",
    "pointer",
    "stabilize",
    "heterodyne",
    "calibrate",
    "limits",
)

_V_PER_M_PER_V_PER_CM = 100.0


def _dataclass_defaults(cls):
    return {f.name: f.default for f in fields(cls)}


def _pointer_block(angle=True):
    block = {
        "k": 10.0,
        "w": 1.0e-3,
        "span_w": 10.0,
        "points": 1001,
    }
    if angle:
        block.update({"delta_phi": 1.0e-3, "delta_beta": 0.0, "angle": math.pi / 4})
    return block


def _heterodyne_block():
    block = _dataclass_defaults(HeterodyneConfig)
    block["e_signal"] = list(block["e_signal"])
    block["compare"] = True
    return block


def _schema_for(experiment):
    common = {"experiment": experiment, "seed": 0, "output_dir": ""}
    if experiment == "spectrum":
        return {
            **common,
            "medium": _dataclass_defaults(LadderSystemParams),
            "grid": {"span_linewidths": 40.0, "points": 4096},
        }
    if experiment == "pointer":
        return {**common, "pointer": _pointer_block()}
    if experiment == "stabilize":
        pid = _dataclass_defaults(PidParams)
        pid["output_limits"] = list(pid["output_limits"])
        drift = _dataclass_defaults(DriftModel)
        drift["sinusoids"] = [list(pair) for pair in drift["sinusoids"]]
        return {
            **common,
            "pid": pid,
            "drift": drift,
            "loop": {
                "duration": 10.0,
                "loop_on_at": 5.0,
                "phi_f": 0.2,
                "beam_w": 1.0e-3,
                "readout_kick": 10.0,
            },
        }
    if experiment == "heterodyne":
        return {
            **common,
            "medium": _dataclass_defaults(LadderSystemParams),
            "detector": _dataclass_defaults(DetectorParams),
            "pointer": _pointer_block(angle=False),
            "heterodyne": _heterodyne_block(),
        }
    if experiment == "calibrate":
        return {
            **common,
            "medium": _dataclass_defaults(LadderSystemParams),
            "calibrate": {
                "powers_w": [1.0e-6, 4.0e-6, 1.0e-5, 4.0e-5, 1.0e-4],
                "horn_factor": 1000.0,
                "dipole_mw": 1.27e-26,
                "points": 8192,
            },
        }
    if experiment == "limits":
        limits = _dataclass_defaults(LimitInputs)
        limits["geometry"] = _dataclass_defaults(CellGeometry)
        return {**common, "limits": limits}
    raise ConfigError(
        f"unknown experiment {experiment!r}; expected one of "
        + ", ".join(EXPERIMENTS)
    )


def _type_label(value):
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "list"
    if isinstance(value, dict):
        return "object"
    return type(value).__name__


def _merge(schema, supplied, path=""):
    """Defaults overlaid with user values; unknown keys rejected by path."""
    if not isinstance(supplied, dict):
        raise ConfigError(
            f"config section {path or '<root>'} must be an object, "
            f"got {_type_label(supplied)}"
        )
    merged = copy.deepcopy(schema)
    for key, value in supplied.items():
        full = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown config key: {full}")
        default = schema[key]
        if isinstance(default, dict):
            merged[key] = _merge(default, value, full)
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{full} must be a boolean")
            merged[key] = value
        elif isinstance(default, (int, float)):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{full} must be a number")
            merged[key] = value
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError(f"{full} must be a string")
            merged[key] = value
        elif isinstance(default, list):
            if not isinstance(value, list):
                raise ConfigError(f"{full} must be a list")
            merged[key] = copy.deepcopy(value)
        else:
            raise ConfigError(f"{full} has an unsupported schema type")
    return merged


def load_config(path):
    """Parse and validate a config file; returns the fully populated echo."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    experiment = raw.get("experiment")
    if not isinstance(experiment, str):
        raise ConfigError("config needs an 'experiment' string key")
    schema = _schema_for(experiment)
    merged = _merge(schema, raw)
    if not isinstance(merged["seed"], int):
        raise ConfigError("seed must be an integer")
    return merged


# ---------------------------------------------------------------------------
# experiment runners (each returns the list of files written)


def _medium_from(block):
    return LadderSystemParams(**block)


def _detector_from(block):
    return DetectorParams(**block)


def _run_spectrum(config, out_dir, seed):
    medium = _medium_from(config["medium"])
    grid = detuning_grid(
        medium, config["grid"]["span_linewidths"], config["grid"]["points"]
    )
    spectrum = susceptibility_spectrum(medium, grid)
    rows = []
    for point in spectrum:
        pair = phase_and_absorption(point.chi, medium)
        rows.append(
            (
                point.delta_p / (2.0 * math.pi),
                point.chi.real,
                point.chi.imag,
                pair.delta_phi,
                pair.delta_beta,
            )
        )
    csv_path = os.path.join(out_dir, "spectrum.csv")
    write_csv(
        csv_path,
        ("delta_p_hz", "re_chi", "im_chi", "delta_phi_rad", "delta_beta"),
        rows,
    )
    notes = []
    try:
        residual = kk_residual(spectrum)
    except GridPolicyError as exc:
        residual = math.nan
        notes.append(str(exc))
    try:
        f_at = at_splitting(spectrum)
    except UnresolvedSplittingError as exc:
        f_at = math.nan
        notes.append(str(exc))
    report_path = os.path.join(out_dir, "report.json")
    write_json(
        report_path,
        {
            "kk_residual": residual,
            "at_splitting_hz": f_at,
            "points": len(spectrum),
            "span_linewidths": config["grid"]["span_linewidths"],
            "notes": notes,
        },
    )
    return [csv_path, report_path]


def _run_pointer(config, out_dir, seed):
    block = config["pointer"]
    pre = PreSelection(block["delta_phi"], block["delta_beta"])
    post = PostSelection(block["angle"])
    coupling = WeakCoupling(block["k"])
    beam = BeamPointer.centered(block["w"], block["span_w"], int(block["points"]))
    readout = quadrature_oracle(pre, post, coupling, beam)
    csv_path = os.path.join(out_dir, "profile.csv")
    write_csv(
        csv_path,
        ("x_m", "intensity"),
        zip(beam.grid.tolist(), readout.profile.tolist()),
    )
    json_path = os.path.join(out_dir, "readout.json")
    write_json(
        json_path,
        {
            "delta_phi": pre.delta_phi,
            "delta_beta": pre.delta_beta,
            "k": coupling.k,
            "w": beam.w,
            "centroid_m": readout.centroid,
            "eta": readout.eta,
            "p_post": readout.p_post,
        },
    )
    return [csv_path, json_path]


def _run_stabilize(config, out_dir, seed):
    pid_block = dict(config["pid"])
    pid_block["output_limits"] = tuple(pid_block["output_limits"])
    pid = PidParams(**pid_block)
    drift_block = dict(config["drift"])
    drift_block["sinusoids"] = tuple(tuple(pair) for pair in drift_block["sinusoids"])
    drift = DriftModel(**drift_block)
    loop = config["loop"]
    beam = BeamPointer.centered(loop["beam_w"])
    trace = simulate_closed_loop_detailed(
        pid,
        drift,
        loop["duration"],
        loop["loop_on_at"],
        seed,
        phi_f=loop["phi_f"],
        beam=beam,
    )
    std_open, std_closed, ratio = suppression_report(trace.ts, loop["loop_on_at"])
    csv_path = os.path.join(out_dir, "timeseries.csv")
    times = trace.ts.times()
    write_csv(
        csv_path,
        ("t_s", "eta_con", "pid_output"),
        zip(times.tolist(), trace.ts.samples.tolist(), trace.pid_output.tolist()),
    )
    report_path = os.path.join(out_dir, "report.json")
    phase_dev_rad = equivalent_phase_deviation(
        std_closed, loop["readout_kick"], loop["beam_w"]
    )
    write_json(
        report_path,
        {
            "std_open": std_open,
            "std_closed": std_closed,
            "ratio": ratio,
            "gains": {"kp": pid.kp, "ki": pid.ki, "kd": pid.kd},
            "phase_deviation_deg": math.degrees(phase_dev_rad),
            "loop_on_at_s": loop["loop_on_at"],
            "duration_s": loop["duration"],
        },
    )
    return [csv_path, report_path]


def _points_payload(points):
    return [
        {
            "e_vpercm": p.e_signal / _V_PER_M_PER_V_PER_CM,
            "beat_db": p.beat_db,
            "snr_db": p.snr_db,
            "peak_freq_hz": p.peak_freq_hz,
        }
        for p in points
    ]


def _noise_floor_db(points):
    floors = [p.floor_density for p in points if p.floor_density > 0.0]
    if not floors:
        return math.nan
    return 10.0 * math.log10(float(np.median(floors)))


def _scheme_files(out_dir, scheme, points, fit):
    json_path = os.path.join(out_dir, f"sensitivity_{scheme}.json")
    write_json(
        json_path,
        {
            "scheme": scheme,
            "points": _points_payload(points),
            "e_min_vpercm": fit.e_min / _V_PER_M_PER_V_PER_CM,
            "fit": {
                "slope": fit.slope_db_per_db,
                "r2": fit.r_squared,
                "intercept_db": fit.intercept_db,
            },
            "noise_floor_db": _noise_floor_db(points),
        },
    )
    csv_path = os.path.join(out_dir, f"sweep_{scheme}.csv")
    write_csv(
        csv_path,
        ("e_vpercm", "beat_db", "snr_db"),
        (
            (p.e_signal / _V_PER_M_PER_V_PER_CM, p.beat_db, p.snr_db)
            for p in points
        ),
    )
    return [json_path, csv_path]


def _run_heterodyne(config, out_dir, seed, threads):
    medium = _medium_from(config["medium"])
    detector = _detector_from(config["detector"])
    block = dict(config["heterodyne"])
    compare = block.pop("compare")
    block["e_signal"] = tuple(block["e_signal"])
    hetero = HeterodyneConfig(**block)
    pblock = config["pointer"]
    pointer = PointerSetup(
        post=PostSelection(math.pi / 4),
        coupling=WeakCoupling(pblock["k"]),
        beam=BeamPointer.centered(pblock["w"], pblock["span_w"], int(pblock["points"])),
    )

    def run_sweeps(map_fn):
        if compare:
            from dataclasses import replace

            points_d = sensitivity_sweep(
                replace(hetero, readout="dispersion"),
                medium,
                pointer,
                detector,
                seed,
                map_fn=map_fn,
            )
            points_a = sensitivity_sweep(
                replace(hetero, readout="amplitude"),
                medium,
                pointer,
                detector,
                seed,
                map_fn=map_fn,
            )
            return points_d, points_a
        points = sensitivity_sweep(
            hetero, medium, pointer, detector, seed, map_fn=map_fn
        )
        return (points, None) if hetero.readout == "dispersion" else (None, points)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points_d, points_a = run_sweeps(pool.map)
    else:
        points_d, points_a = run_sweeps(map)

    written = []
    if points_d is not None:
        written.extend(
            _scheme_files(out_dir, "dispersion", points_d, min_detectable_field(points_d))
        )
    if points_a is not None:
        written.extend(
            _scheme_files(out_dir, "amplitude", points_a, min_detectable_field(points_a))
        )
    if compare:
        result = comparison_from_points(points_d, points_a)
        comparison_path = os.path.join(out_dir, "comparison.json")
        write_json(
            comparison_path,
            {
                "delta_sensitivity_db": result.delta_sensitivity_db,
                "delta_min_field_db": result.delta_min_field_db,
                "delta_min_field_db_power": result.delta_min_field_db_power,
                "e_min_vpercm_dispersion": result.dispersion.e_min
                / _V_PER_M_PER_V_PER_CM,
                "e_min_vpercm_amplitude": result.amplitude.e_min
                / _V_PER_M_PER_V_PER_CM,
            },
        )
        written.append(comparison_path)
    return written


def _run_calibrate(config, out_dir, seed):
    medium = _medium_from(config["medium"])
    block = config["calibrate"]
    result = _calibration_curve(
        block["powers_w"],
        block["horn_factor"],
        medium,
        dipole_mw=block["dipole_mw"],
        points=int(block["points"]),
    )
    csv_path = os.path.join(out_dir, "calibration.csv")
    write_csv(
        csv_path,
        ("power_w", "e_applied_vperm", "f_at_hz", "e_recovered_vperm", "resolved"),
        (
            (e.power_w, e.e_applied, e.f_at_hz, e.e_recovered, e.resolved)
            for e in result.entries
        ),
    )
    json_path = os.path.join(out_dir, "calibration.json")
    write_json(
        json_path,
        {
            "slope": result.slope,
            "r_squared": result.r_squared,
            "horn_factor": block["horn_factor"],
            "entries": [
                {
                    "power_w": e.power_w,
                    "e_applied_vperm": e.e_applied,
                    "f_at_hz": e.f_at_hz,
                    "e_recovered_vperm": e.e_recovered,
                    "resolved": e.resolved,
                }
                for e in result.entries
            ],
        },
    )
    return [csv_path, json_path]


def _run_limits(config, out_dir, seed):
    block = dict(config["limits"])
    geometry = CellGeometry(**block.pop("geometry"))
    inputs = LimitInputs(geometry=geometry, **block)
    json_path = os.path.join(out_dir, "limits.json")
    write_json(json_path, limits_report(inputs))
    return [json_path]


# ---------------------------------------------------------------------------
# orchestration


def _resolve_output_dir(config, cli_dir):
    if cli_dir:
        return cli_dir
    env_dir = os.environ.get(OUTPUT_DIR_ENV, "")
    if env_dir:
        return env_dir
    return config.get("output_dir") or "."


def run(config, out_dir, seed, threads=1):
    """Dispatch one validated config; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    experiment = config["experiment"]
    started = time.perf_counter()
    if experiment == "spectrum":
        written = _run_spectrum(config, out_dir, seed)
    elif experiment == "pointer":
        written = _run_pointer(config, out_dir, seed)
    elif experiment == "stabilize":
        written = _run_stabilize(config, out_dir, seed)
    elif experiment == "heterodyne":
        written = _run_heterodyne(config, out_dir, seed, threads)
    elif experiment == "calibrate":
        written = _run_calibrate(config, out_dir, seed)
    elif experiment == "limits":
        written = _run_limits(config, out_dir, seed)
    else:
        raise ConfigError(f"unknown experiment {experiment!r}")
    manifest_path = os.path.join(out_dir, "manifest.json")
    write_json(
        manifest_path,
        {
            "experiment": experiment,
            "config": config,
            "seed": seed,
            "versions": {
                "rydsag": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "wall_time_s": time.perf_counter() - started,
            "outputs": [os.path.basename(p) for p in written],
        },
    )
    return manifest_path


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rydsag",
        description="Deterministic experiment runner for the vapor-cell "
        "microwave receiver simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an experiment config")
    sim.add_argument("config_path")
    sim.add_argument("--output-dir", default="")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--threads", type=int, default=1)

    val = sub.add_parser("validate", help="check a config and echo defaults")
    val.add_argument("config_path")

    sch = sub.add_parser("schema", help="print an experiment's config schema")
    sch.add_argument("experiment")

    args = parser.parse_args(argv)
    try:
        if args.command == "schema":
            from .emit import sanitize

            print(json.dumps(sanitize(_schema_for(args.experiment)), indent=2,
                             sort_keys=True))
            return 0
        config = load_config(args.config_path)
        if args.command == "validate":
            from .emit import sanitize

            print(json.dumps(sanitize(config), indent=2, sort_keys=True))
            return 0
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        seed = config["seed"] if args.seed is None else args.seed
        out_dir = _resolve_output_dir(config, args.output_dir)
        manifest = run(config, out_dir, seed, args.threads)
        print(manifest)
        return 0
    except SimulationError as exc:
        print(json.dumps({"error": {"category": exc.category, "message": str(exc)}}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
