"""Preset parameter sweeps and batch execution with a run manifest."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analysis import BistabilityReport, analyze, trend_compare
from .errors import MultistabError
from .iocurve import DEFAULT_GRID, IOCurve, auto_x_max, sweep
from .model import SystemConfig, default_config, validate


@dataclass(frozen=True)
class TrendSpec:
    """An ordinal claim checked across the axis, after sorting by ``sort_by``."""

    key: str
    order: str
    scope: str = "outermost"
    sort_by: Optional[str] = None


@dataclass(frozen=True)
class Scenario:
    name: str
    base: SystemConfig
    axis_name: str
    axis_values: tuple = ()
    grid_points: int = DEFAULT_GRID
    x_max: Optional[float] = None
    outputs: tuple[str, ...] = ("curve", "report")
    trends: tuple[TrendSpec, ...] = ()
    expected_region_count: Optional[int] = None

    def configs(self) -> list[SystemConfig]:
        """One configuration per axis value, in axis order."""
        return [self.base.replace(**overrides) for overrides in self.axis_values]

    def with_io_mode(self, io_mode: str) -> "Scenario":
        return dataclasses.replace(self, base=self.base.replace(io_mode=io_mode))


def _three_level(**changes) -> SystemConfig:
    return default_config("A").replace(**changes)


def _four_level(**changes) -> SystemConfig:
    return default_config("B").replace(**changes)


# fig3-fig5 presets share the fig2 baseline cooperativity C=90.
PRESETS = {
    "fig2": lambda: Scenario(
        "fig2", _three_level(delta_23=12.0, delta_c=-6.0, delta_p=0.0, omega_c=0.0),
        "C", tuple({"C": c} for c in (90.0, 180.0, 380.0)),
        trends=(TrendSpec("lower_threshold", "increasing", sort_by="C"),
                TrendSpec("upper_threshold", "increasing", sort_by="C")),
    ),
    "fig3a": lambda: Scenario(
        "fig3a", _three_level(delta_p=0.0, omega_c=0.0),
        "delta_23", tuple({"delta_23": d, "delta_c": -d / 2} for d in (12.0, 8.0, 4.0)),
        trends=(TrendSpec("lower_threshold", "decreasing", sort_by="delta_23"),
                TrendSpec("upper_threshold", "increasing", sort_by="delta_23")),
    ),
    "fig3b": lambda: Scenario(
        "fig3b", _three_level(delta_23=12.0, delta_c=-6.0, omega_c=0.0),
        "delta_p", tuple({"delta_p": d} for d in (0.0, -3.0, 3.0)),
    ),
    "fig4a": lambda: Scenario(
        "fig4a", _three_level(delta_23=12.0, delta_c=-6.0, delta_control=0.0, omega_c=0.1),
        "delta_p", tuple({"delta_p": d} for d in (0.01, 0.03, 0.05)),
        trends=(TrendSpec("upper_threshold", "increasing", scope="lowest", sort_by="delta_p"),),
        expected_region_count=3,
    ),
    "fig4b": lambda: Scenario(
        "fig4b", _three_level(delta_23=12.0, delta_c=-6.0, delta_control=0.0, delta_p=0.03),
        "omega_c", tuple({"omega_c": w} for w in (0.06, 0.1)),
        trends=(TrendSpec("upper_threshold", "decreasing", scope="lowest", sort_by="omega_c"),),
    ),
    "fig5a": lambda: Scenario(
        "fig5a", _four_level(delta_c=0.0, delta_23=5.0, delta_34=10.0),
        "delta_p", tuple({"delta_p": d} for d in (-10.0, -12.5, -15.0)),
        trends=(TrendSpec("upper_threshold", "decreasing", scope="highest", sort_by="delta_p"),
                TrendSpec("upper_threshold", "increasing", scope="lowest", sort_by="delta_p")),
        expected_region_count=3,
    ),
    "fig5b": lambda: Scenario(
        "fig5b", _four_level(delta_c=0.0),
        "(delta_23, delta_34, delta_p)",
        tuple({"delta_23": a, "delta_34": b, "delta_p": p}
              for a, b, p in ((5.0, 10.0, -12.5), (4.0, 6.0, -8.0), (2.0, 4.0, -5.0))),
        trends=(TrendSpec("upper_threshold", "increasing", scope="each", sort_by="delta_23"),
                TrendSpec("lower_threshold", "increasing", scope="each", sort_by="delta_23")),
        expected_region_count=3,
    ),
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def curve_for(config: SystemConfig, grid_points: int = DEFAULT_GRID,
              x_max: Optional[float] = None, threads: int = 1) -> IOCurve:
    if x_max is None:
        x_max = auto_x_max(config)
    return sweep(config, np.linspace(0.0, x_max, grid_points), threads=threads)


def evaluate_trends(scenario: Scenario, configs, reports: list[BistabilityReport]) -> list[dict]:
    out = []
    for trend in scenario.trends:
        order = list(range(len(reports)))
        if trend.sort_by:
            order.sort(key=lambda k: configs[k].to_dict()[trend.sort_by])
        result = trend_compare([reports[k] for k in order], trend.key, trend.order, scope=trend.scope)
        doc = result.to_dict()
        doc["sort_by"] = trend.sort_by
        doc["axis"] = [configs[k].to_dict()[trend.sort_by] for k in order] if trend.sort_by else None
        out.append(doc)
    return out


def _atomic_write(path: Path, text: str) -> str:
    data = text.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return hashlib.sha256(data).hexdigest()


def run(scenario: Scenario, out_dir, threads: int = 1) -> dict:
    """Execute every axis value, write tables and reports, return the manifest.

    Solver failures are recorded in the manifest instead of aborting; trend
    outcomes never make a run fail.
    """
    start = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    errors = []
    configs = scenario.configs()
    reports: dict[int, BistabilityReport] = {}
    for k, cfg in enumerate(configs):
        problems = validate(cfg)
        if problems:
            errors.append({"index": k, "error": "; ".join(problems)})
            continue
        try:
            curve = curve_for(cfg, scenario.grid_points, scenario.x_max, threads)
        except MultistabError as exc:
            errors.append({"index": k, "error": str(exc), "x": getattr(exc, "x", None)})
            continue
        stem = f"{scenario.name}_{k}"
        if "curve" in scenario.outputs:
            files[f"{stem}.tsv"] = _atomic_write(out / f"{stem}.tsv", curve.to_table())
            files[f"{stem}.json"] = _atomic_write(out / f"{stem}.json", curve.to_json())
        report = analyze(curve, label=stem)
        reports[k] = report
        if "report" in scenario.outputs:
            files[f"{stem}_report.json"] = _atomic_write(out / f"{stem}_report.json",
                                                        report.to_json())
    trends = []
    if scenario.trends and len(reports) == len(configs) and configs:
        trends = evaluate_trends(scenario, configs, [reports[k] for k in range(len(configs))])
        files["trends.json"] = _atomic_write(out / "trends.json",
                                             json.dumps(trends, indent=1, sort_keys=True) + "\n")
    manifest = {
        "scenario": scenario.name,
        "tool_version": __version__,
        "axis": {"name": scenario.axis_name, "values": list(scenario.axis_values)},
        "configs": [c.to_dict() for c in configs],
        "region_counts": [reports[k].region_count if k in reports else None
                          for k in range(len(configs))],
        "expected_region_count": scenario.expected_region_count,
        "trends": trends,
        "errors": errors,
        "files": files,
        "wall_time_s": time.perf_counter() - start,
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest
