"""Command-line front end: configuration parsing, dispatch, artifacts.

Subcommands: ``design``, ``evolve``, ``train``, ``scan-detuning``,
``scan-two-photon``, ``n-scaling``.  Every run writes its delimited or JSON
artifacts plus rendered figures into one output directory, together with a
manifest recording the configuration echo, package version, checksums and
wall time.  Configuration is accepted both as flags and as a ``key = value``
config file; flags override file values.

All rates and detunings are in units of 1/T with the width T settable
(default 1); times are in units of T.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Errors
are emitted as one-line JSON on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .dynamics import IntegrationError, ae_validity, integrate_five_state
from .experiments import (
    DEFAULT_DETUNING,
    DEFAULT_GRID_POINTS,
    DEFAULT_ONE_PHOTON_RANGE,
    DEFAULT_TWO_PHOTON_RANGE,
    default_workers,
    grid_axis,
    n_scaling,
    scan_one_photon,
    scan_two_photon,
    sign_flip_asymmetry,
)
from .pulses import (
    DEFAULT_AREA,
    FULL_TRANSFER_ANGLE,
    MIN_SPACING_FACTOR,
    SynthesisError,
    build_schedule,
    mixing_angles,
)
from .reports import (
    train_report,
    write_grid_csv,
    write_grid_error_log,
    write_json,
    write_manifest,
    write_n_scaling_csv,
    write_schedule_csv,
    write_trajectory_csv,
)
from .states import DecayConfig, DetuningConfig

COMMANDS = ("design", "evolve", "train", "scan-detuning", "scan-two-photon", "n-scaling")
DEFAULT_DT = 1e-4
DEFAULT_OUTPUT_ROOT = "chainpulse-out"


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def parse_angle(text) -> float:
    """Angles as plain radians or as 'pi/<n>' fractions."""

    if isinstance(text, (int, float)):
        return float(text)
    text = text.strip().lower()
    match = re.fullmatch(r"pi\s*/\s*(\d+(?:\.\d+)?)", text)
    if match:
        return math.pi / float(match.group(1))
    if text == "pi":
        return math.pi
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}; use radians or pi/<n>") from None


@dataclass
class RunConfig:
    """Normalized, validated configuration of one CLI run."""

    command: str
    n_pairs: int = 5
    target_angle: float = FULL_TRANSFER_ANGLE
    delta1: float = DEFAULT_DETUNING
    delta2: float = DEFAULT_DETUNING
    small_delta1: float = 0.0
    small_delta2: float = 0.0
    gamma_e1: float = 0.0
    gamma_g2: float = 0.0
    gamma_e2: float = 0.0
    width: float = 1.0
    dt: float = DEFAULT_DT
    spacing: float = 6.0 * math.sqrt(2.0)
    area: float = DEFAULT_AREA
    samples: int = 2000
    workers: int = dataclasses.field(default_factory=default_workers)
    plot: bool = True
    output: str = ""
    axis1_min: float = 0.0
    axis1_max: float = 0.0
    axis1_points: int = DEFAULT_GRID_POINTS
    axis2_min: float = 0.0
    axis2_max: float = 0.0
    axis2_points: int = DEFAULT_GRID_POINTS
    n_max: int = 10

    @property
    def det(self) -> DetuningConfig:
        return DetuningConfig(self.delta1, self.delta2,
                              self.small_delta1, self.small_delta2)

    @property
    def decay(self) -> DecayConfig:
        return DecayConfig(self.gamma_e1, self.gamma_g2, self.gamma_e2)


_FIELD_PARSERS = {
    "command": str,
    "n_pairs": int,
    "target_angle": parse_angle,
    "delta1": float,
    "delta2": float,
    "small_delta1": float,
    "small_delta2": float,
    "gamma_e1": float,
    "gamma_g2": float,
    "gamma_e2": float,
    "width": float,
    "dt": float,
    "spacing": float,
    "area": float,
    "samples": int,
    "workers": int,
    "plot": lambda s: {"true": True, "false": False}[str(s).strip().lower()],
    "output": str,
    "axis1_min": float,
    "axis1_max": float,
    "axis1_points": int,
    "axis2_min": float,
    "axis2_max": float,
    "axis2_points": int,
    "n_max": int,
    "zeta": float,  # input-only alias, normalized into delta1/delta2
}


def serialize_config(config: RunConfig) -> str:
    """Render a config as a round-trippable key = value file."""

    lines = []
    for field in dataclasses.fields(config):
        value = getattr(config, field.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = format(value, ".17g")
        lines.append(f"{field.name} = {value}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict:
    """Parse key = value lines; unknown keys are rejected by name."""

    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno} is not 'key = value': {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_PARSERS:
            accepted = ", ".join(sorted(_FIELD_PARSERS))
            raise ConfigError(f"unknown config key {key!r}; accepted keys: {accepted}")
        try:
            values[key] = _FIELD_PARSERS[key](value.strip())
        except ConfigError:
            raise
        except (ValueError, KeyError):
            raise ConfigError(f"bad value for {key!r}: {value.strip()!r}") from None
    return values


def _validate(config: RunConfig) -> RunConfig:
    checks = [
        ("n_pairs", config.n_pairs >= 1, "must be an integer >= 1"),
        ("target_angle", 0.0 < config.target_angle <= FULL_TRANSFER_ANGLE,
         "must lie in (0, pi/4]"),
        ("width", config.width > 0.0, "must be > 0"),
        ("dt", config.dt > 0.0, "must be > 0"),
        ("area", config.area > 0.0, "must be > 0"),
        ("samples", config.samples >= 2, "must be >= 2"),
        ("workers", config.workers >= 1, "must be >= 1"),
        ("spacing",
         config.spacing >= MIN_SPACING_FACTOR * math.sqrt(2.0) * config.width,
         f"must be >= {MIN_SPACING_FACTOR}*sqrt(2)*width"),
        ("n_max", config.n_max >= 1, "must be >= 1"),
        ("axis1_points", config.axis1_points >= 2, "must be >= 2"),
        ("axis2_points", config.axis2_points >= 2, "must be >= 2"),
    ]
    for name, ok, requirement in checks:
        if not ok:
            raise ConfigError(f"{name} = {getattr(config, name)!r} invalid: {requirement}")
    for name in ("delta1", "delta2", "small_delta1", "small_delta2",
                 "gamma_e1", "gamma_g2", "gamma_e2"):
        if not math.isfinite(getattr(config, name)):
            raise ConfigError(f"{name} must be finite")
    for name in ("gamma_e1", "gamma_g2", "gamma_e2"):
        if getattr(config, name) < 0.0:
            raise ConfigError(f"{name} must be >= 0")
    return config


def _grid_defaults(command: str) -> dict:
    if command == "scan-detuning":
        lo, hi = DEFAULT_ONE_PHOTON_RANGE
    else:
        lo, hi = DEFAULT_TWO_PHOTON_RANGE
    return {"axis1_min": lo, "axis1_max": hi, "axis2_min": lo, "axis2_max": hi}


def build_config(command: str, file_values: dict | None = None,
                 flag_values: dict | None = None) -> RunConfig:
    """Merge defaults, config-file values and flags into a validated RunConfig."""

    file_values = dict(file_values or {})
    flag_values = {k: v for k, v in (flag_values or {}).items() if v is not None}

    file_command = file_values.pop("command", None)
    if file_command is not None and file_command != command:
        raise ConfigError(
            f"config file was written for command {file_command!r}, not {command!r}")

    merged = {**file_values, **flag_values}
    zeta = merged.pop("zeta", None)
    if zeta is not None:
        if "delta1" in merged or "delta2" in merged:
            raise ConfigError(
                "give either zeta or explicit delta1/delta2, not both")
        if zeta <= 0.0:
            raise ConfigError(f"zeta = {zeta!r} invalid: must be > 0")
        merged["delta2"] = DEFAULT_DETUNING
        merged["delta1"] = zeta * DEFAULT_DETUNING

    fields = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(merged) - fields
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    values = {"command": command, **_grid_defaults(command), **merged}
    if "spacing" not in merged:
        width = values.get("width", 1.0)
        values["spacing"] = 6.0 * math.sqrt(2.0) * width
    if not values.get("output"):
        values["output"] = str(Path(DEFAULT_OUTPUT_ROOT) / command)
    return _validate(RunConfig(**values))


def parse_config(argv) -> RunConfig:
    """Parse the full CLI surface (flags plus optional config file)."""

    parser = _build_parser()
    namespace = parser.parse_args(argv)
    command = namespace.command
    file_values = {}
    if namespace.config is not None:
        path = Path(namespace.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        file_values = parse_config_text(path.read_text(encoding="utf-8"))
    flag_values = {
        key: value for key, value in vars(namespace).items()
        if key not in ("command", "config")
    }
    gammas = flag_values.pop("gammas", None)
    if gammas is not None:
        flag_values["gamma_e1"], flag_values["gamma_g2"], flag_values["gamma_e2"] = gammas
    return build_config(command, file_values, flag_values)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainpulse",
        description="Coincident pulse trains on a five-state chainwise system "
                    "(units: rates in 1/T, times in T)",
    )
    parser.add_argument("--version", action="version", version=f"chainpulse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file; flags override it")
    common.add_argument("-o", "--output", help="output directory")
    common.add_argument("--n-pairs", dest="n_pairs", type=int, help="number of pulse pairs N")
    common.add_argument("--target-angle", dest="target_angle", type=parse_angle,
                        help="target mixing angle, radians or pi/<n> (pi/4 = full transfer)")
    common.add_argument("--delta1", type=float, help="one-photon detuning of e1 (1/T)")
    common.add_argument("--delta2", type=float, help="one-photon detuning of e2 (1/T)")
    common.add_argument("--zeta", type=float,
                        help="detuning ratio delta1/delta2 with delta2 fixed at "
                             f"{DEFAULT_DETUNING:g}/T (conflicts with --delta1/--delta2)")
    common.add_argument("--small-delta1", dest="small_delta1", type=float,
                        help="two-photon detuning of the first Raman pair (1/T)")
    common.add_argument("--small-delta2", dest="small_delta2", type=float,
                        help="two-photon detuning of the second Raman pair (1/T)")
    common.add_argument("--gammas", nargs=3, type=float, metavar=("G_E1", "G_G2", "G_E2"),
                        help="decay rates of e1, g2, e2 (1/T)")
    common.add_argument("--width", type=float, help="effective envelope width T")
    common.add_argument("--dt", type=float, help="integration step (default 1e-4 T)")
    common.add_argument("--spacing", type=float, help="step center spacing (default 6*sqrt(2)*T)")
    common.add_argument("--area", type=float, help="per-step rms pulse area (default 2*pi)")
    common.add_argument("--samples", type=int, help="trajectory output samples")
    common.add_argument("--workers", type=int, help="scan worker processes")
    common.add_argument("--plot", action=argparse.BooleanOptionalAction,
                        help="render figures next to the delimited output")

    grid = argparse.ArgumentParser(add_help=False)
    for axis in ("axis1", "axis2"):
        for part, kind in (("min", float), ("max", float), ("points", int)):
            grid.add_argument(f"--{axis}-{part}", dest=f"{axis}_{part}", type=kind)

    sub.add_parser("design", parents=[common],
                   help="synthesize a pulse train and export the schedule")
    sub.add_parser("evolve", parents=[common],
                   help="integrate the full five-state dynamics")
    sub.add_parser("train", parents=[common],
                   help="closed-form train propagator: final state and transients")
    sub.add_parser("scan-detuning", parents=[common, grid],
                   help="final transfer over a grid of one-photon detunings")
    sub.add_parser("scan-two-photon", parents=[common, grid],
                   help="final transfer over a grid of two-photon detunings")
    ns = sub.add_parser("n-scaling", parents=[common],
                        help="transient middle-state maximum vs number of pairs")
    ns.add_argument("--n-max", dest="n_max", type=int, help="largest N to run")
    return parser


def _summary(result) -> dict:
    return {
        "final_populations": [float(p) for p in result.final_populations],
        "max_transients": [float(p) for p in result.max_transients],
        "norm_loss": float(result.norm_loss),
    }


def execute(config: RunConfig) -> list[Path]:
    """Run one configured command; returns the paths of all written artifacts."""

    start = time.perf_counter()
    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    extra: dict = {}
    command = config.command

    if command in ("design", "evolve"):
        schedule = build_schedule(config.n_pairs, config.det,
                                  target_angle=config.target_angle,
                                  width=config.width, spacing=config.spacing,
                                  area=config.area)
        margins = ae_validity(schedule)
        extra["ae_margins"] = {
            "first": margins.margin_first, "second": margins.margin_second,
            "rating": margins.rating,
        }
        if command == "design":
            outputs.append(write_schedule_csv(out_dir / "schedule.csv", schedule,
                                              config.samples))
            if config.plot:
                from .plots import plot_schedule
                outputs.append(plot_schedule(schedule, out_dir / "schedule.png",
                                             config.samples))
        else:
            result = integrate_five_state(schedule, decay=config.decay,
                                          dt=config.dt, samples=config.samples)
            outputs.append(write_trajectory_csv(out_dir / "trajectory.csv", result))
            extra["summary"] = _summary(result)
            if config.plot:
                from .plots import plot_trajectory
                outputs.append(plot_trajectory(result, out_dir / "trajectory.png",
                                               schedule))

    elif command == "train":
        angles = mixing_angles(config.n_pairs, config.target_angle)
        report = train_report(config.n_pairs, config.target_angle, config.area, angles)
        outputs.append(write_json(out_dir / "train.json", report))
        if config.plot:
            from .plots import plot_train
            outputs.append(plot_train(report, out_dir / "train.png"))

    elif command == "scan-detuning":
        axis1 = grid_axis(config.axis1_min, config.axis1_max, config.axis1_points)
        axis2 = grid_axis(config.axis2_min, config.axis2_max, config.axis2_points)
        kwargs = dict(n_pairs=config.n_pairs, dt=config.dt,
                      target_angle=config.target_angle, width=config.width,
                      spacing=config.spacing, area=config.area,
                      samples=config.samples, workers=config.workers)
        grid = scan_one_photon(axis1, axis2, decay=config.decay, **kwargs)
        outputs.append(write_grid_csv(out_dir / "scan_detuning.csv", grid))
        error_log = write_grid_error_log(out_dir / "scan_detuning.errors.log", grid)
        grids = [("scan_detuning", grid)]
        if not config.decay.is_zero:
            control = scan_one_photon(axis1, axis2, **kwargs)
            outputs.append(write_grid_csv(out_dir / "scan_detuning_control.csv", control))
            write_grid_error_log(out_dir / "scan_detuning_control.errors.log", control)
            grids.append(("scan_detuning_control", control))
        if error_log is not None:
            outputs.append(error_log)
        if config.plot:
            from .plots import plot_grid
            for name, g in grids:
                outputs.append(plot_grid(g, out_dir / f"{name}.png"))

    elif command == "scan-two-photon":
        axis1 = grid_axis(config.axis1_min, config.axis1_max, config.axis1_points)
        axis2 = grid_axis(config.axis2_min, config.axis2_max, config.axis2_points)
        grid = scan_two_photon(axis1, axis2, det=config.det, n_pairs=config.n_pairs,
                               dt=config.dt, target_angle=config.target_angle,
                               width=config.width, spacing=config.spacing,
                               area=config.area, samples=config.samples,
                               decay=config.decay, workers=config.workers)
        outputs.append(write_grid_csv(out_dir / "scan_two_photon.csv", grid))
        error_log = write_grid_error_log(out_dir / "scan_two_photon.errors.log", grid)
        if error_log is not None:
            outputs.append(error_log)
        extra["sign_flip_asymmetry"] = sign_flip_asymmetry(grid)
        if config.plot:
            from .plots import plot_grid
            outputs.append(plot_grid(grid, out_dir / "scan_two_photon.png"))

    elif command == "n-scaling":
        rows = n_scaling(config.n_max, target_angle=config.target_angle,
                         det=config.det, dt=config.dt, width=config.width,
                         spacing=config.spacing, area=config.area)
        outputs.append(write_n_scaling_csv(out_dir / "n_scaling.csv", rows))
        if config.plot:
            from .plots import plot_n_scaling
            outputs.append(plot_n_scaling(rows, out_dir / "n_scaling.png"))

    else:
        raise ConfigError(f"unknown command {command!r}")

    wall = time.perf_counter() - start
    manifest = write_manifest(out_dir / "manifest.json", command,
                              dataclasses.asdict(config), outputs, wall, extra)
    outputs.append(manifest)
    return outputs


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
        outputs = execute(config)
    except (ConfigError, SynthesisError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
