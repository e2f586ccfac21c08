"""Command-line interface: ``multistab {sweep,spectrum,analyze,preset}``.

Exit codes: 0 success, 1 usage or configuration error, 2 solver failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .analysis import analyze
from .errors import ConfigError, MultistabError
from .iocurve import DEFAULT_GRID, IOCurve, weak_probe_spectrum
from .model import IO_MODES, SystemConfig, default_config, load_config, validate
from .scenarios import PRESETS, curve_for, preset, run

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=("A", "B"), help="level scheme (default A)")
    p.add_argument("--config", type=Path, help="YAML/JSON file with flat configuration keys")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--io-mode", choices=IO_MODES)
    p.add_argument("--kappa", type=float)
    p.add_argument("--out", type=Path, help="output file (default stdout)")
    p.add_argument("--format", choices=("table", "json"), default="table")


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="number of x samples")
    p.add_argument("--x-max", type=float, help="largest output amplitude (default: automatic)")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multistab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="input-output curve")
    _common(p)
    _grid_flags(p)

    p = sub.add_parser("analyze", help="turning points, regions and hysteresis")
    _common(p)
    _grid_flags(p)
    p.add_argument("--curve", type=Path, help="analyze a curve JSON written by 'sweep'")

    p = sub.add_parser("spectrum", help="weak-probe transmission versus probe detuning")
    _common(p)
    p.add_argument("--x-probe", type=float, default=1e-4)
    p.add_argument("--dp-min", type=float, default=-20.0)
    p.add_argument("--dp-max", type=float, default=20.0)
    p.add_argument("--dp-points", type=int, default=401)
    p.add_argument("--tie-control", action="store_true",
                   help="set the control detuning equal to the probe detuning")

    p = sub.add_parser("preset", help="run a preset parameter scan")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--io-mode", choices=IO_MODES)
    p.add_argument("--format", choices=("table", "json"), default="table")
    _grid_flags(p)
    return parser


def config_from_args(args) -> SystemConfig:
    config = load_config(args.config) if args.config else default_config(args.scheme or "A")
    changes = {}
    if args.config and args.scheme:
        changes["scheme"] = args.scheme
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        changes[key.strip()] = yaml.safe_load(value)
    if args.io_mode:
        changes["io_mode"] = args.io_mode
    if args.kappa is not None:
        changes["kappa"] = args.kappa
    if changes:
        config = config.replace(**changes)
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    return config


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _curve_from_json(path: Path) -> IOCurve:
    doc = json.loads(path.read_text())
    cols = doc["columns"]
    rows = np.asarray(doc["rows"], dtype=float)
    x = rows[:, cols.index("x")]
    y = rows[:, cols.index("Re_y")] + 1j * rows[:, cols.index("Im_y")]
    config = SystemConfig.from_dict(doc["config"]) if doc.get("config") else None
    return IOCurve(x, y, config)


def _report_table(report) -> str:
    lines = [f"# stability criterion: {report.stability_criterion}",
             "kind\tx\tI_T\tI_in"]
    lines += [f"{tp.kind}\t{tp.x!r}\t{tp.I_T!r}\t{tp.I_in!r}" for tp in report.turning_points]
    lines += ["", "region\tlower_threshold\tupper_threshold\tmultiplicity"]
    lines += [f"{k}\t{r.lo!r}\t{r.hi!r}\t{r.multiplicity}" for k, r in enumerate(report.regions)]
    return "\n".join(lines) + "\n"


def _cmd_sweep(args) -> int:
    config = config_from_args(args)
    curve = curve_for(config, args.grid, args.x_max, args.threads)
    _emit(curve.to_json() if args.format == "json" else curve.to_table(), args.out)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    if args.curve:
        curve = _curve_from_json(args.curve)
    else:
        curve = curve_for(config_from_args(args), args.grid, args.x_max, args.threads)
    report = analyze(curve, label=str(args.curve or "sweep"))
    _emit(report.to_json() if args.format == "json" else _report_table(report), args.out)
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    config = config_from_args(args)
    if args.dp_points < 2:
        raise UsageError("--dp-points must be at least 2")
    grid = np.linspace(args.dp_min, args.dp_max, args.dp_points)
    try:
        spectrum = weak_probe_spectrum(config, args.x_probe, grid, tie_control=args.tie_control)
    except ValueError as exc:
        if isinstance(exc, MultistabError):
            raise
        raise UsageError(str(exc)) from None
    if args.format == "json":
        text = json.dumps({"config": config.to_dict(), "x_probe": args.x_probe,
                           "columns": ["delta_p", "transmission"],
                           "rows": [list(p) for p in spectrum]}, indent=1, sort_keys=True) + "\n"
    else:
        text = "delta_p\ttransmission\n" + "".join(f"{d!r}\t{t!r}\n" for d, t in spectrum)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_preset(args) -> int:
    scenario = preset(args.preset)
    changes = {"grid_points": args.grid}
    if args.x_max is not None:
        changes["x_max"] = args.x_max
    scenario = dataclasses.replace(scenario, **changes)
    if args.io_mode:
        scenario = scenario.with_io_mode(args.io_mode)
    manifest = run(scenario, args.out, threads=args.threads)
    if args.format == "json":
        sys.stdout.write(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    else:
        print(f"{scenario.name}: {len(manifest['files'])} files in {args.out}")
        print(f"region counts: {manifest['region_counts']}")
        for t in manifest["trends"]:
            verdict = "PASS" if t["passed"] else "FAIL"
            print(f"trend {t['scope']} {t['key']} {t['expected']}: {verdict} {t['observed']}")
        for e in manifest["errors"]:
            print(f"error at axis index {e['index']}: {e['error']}", file=sys.stderr)
    return EXIT_SOLVER if manifest["errors"] else EXIT_OK


COMMANDS = {"sweep": _cmd_sweep, "analyze": _cmd_analyze,
            "spectrum": _cmd_spectrum, "preset": _cmd_preset}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1 or getattr(args, "grid", 2) < 2:
            raise UsageError("--threads must be >= 1 and --grid >= 2")
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"multistab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MultistabError as exc:
        print(f"multistab: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"multistab: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
