"""
Multistability structure of an input-output curve.

Everything here works on ``I_in`` sampled against the output amplitude
``x`` (``I_T = x**2`` is monotone in ``x``, so slopes in ``x`` and in
``I_T`` share their sign). Curves from :func:`multistab.iocurve.sweep`
and synthetic curves are treated identically; when a curve carries an
``evaluator`` it is used to refine fold positions and branch inversions.

Stability is judged by the slope criterion: a branch is stable where
``dI_in/dI_T > 0``. No dynamical stability analysis is performed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .iocurve import IOCurve

STABILITY_CRITERION = "slope: dI_in/dI_T > 0"
GRAZING_TOL = 1e-9

FoldKind = Literal["fold_up", "fold_down"]


@dataclass(frozen=True)
class TurningPoint:
    """A fold of the curve.

    ``fold_up`` is a local maximum of ``I_in`` (an up-sweep jumps here),
    ``fold_down`` a local minimum (a down-sweep jumps here).
    """

    x: float
    I_T: float
    I_in: float
    kind: FoldKind


@dataclass(frozen=True)
class Region:
    """Range of input intensity with several coexisting outputs."""

    lo: float
    hi: float
    multiplicity: int
    folds: tuple[TurningPoint, ...] = ()

    @property
    def lower_threshold(self) -> float:
        return self.lo

    @property
    def upper_threshold(self) -> float:
        return self.hi


@dataclass
class BistabilityReport:
    turning_points: list[TurningPoint]
    regions: list[Region]
    hysteresis_up: list[tuple[float, float]] = field(default_factory=list)
    hysteresis_down: list[tuple[float, float]] = field(default_factory=list)
    stability_criterion: str = STABILITY_CRITERION
    label: str = ""

    @property
    def region_count(self) -> int:
        return len(self.regions)

    @property
    def lower_threshold(self) -> Optional[float]:
        """Lowest switch-down threshold over all regions."""
        return min((r.lo for r in self.regions), default=None)

    @property
    def upper_threshold(self) -> Optional[float]:
        """Highest switch-up threshold over all regions."""
        return max((r.hi for r in self.regions), default=None)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "stability_criterion": self.stability_criterion,
            "turning_points": [asdict(tp) for tp in self.turning_points],
            "regions": [
                {"lo": r.lo, "hi": r.hi, "multiplicity": r.multiplicity} for r in self.regions
            ],
            "thresholds": [
                {"lower": r.lower_threshold, "upper": r.upper_threshold} for r in self.regions
            ],
            "hysteresis": {
                "up": [list(p) for p in self.hysteresis_up],
                "down": [list(p) for p in self.hysteresis_down],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# folds
# ---------------------------------------------------------------------------

def _slope_signs(values: np.ndarray) -> np.ndarray:
    s = np.sign(np.diff(values))
    # flat steps inherit the previous direction
    for k in range(1, s.size):
        if s[k] == 0:
            s[k] = s[k - 1]
    return s


def _refine(curve: IOCurve, i: int, kind: FoldKind) -> tuple[float, float]:
    x, I = curve.x, curve.I_in
    lo, hi = x[i - 1], x[i + 1]
    if curve.evaluator is None:
        # vertex of the parabola through the three bracketing samples
        coeffs = np.polyfit(x[i - 1:i + 2] - x[i], I[i - 1:i + 2], 2)
        if coeffs[0] == 0:
            return float(x[i]), float(I[i])
        xv = float(np.clip(x[i] - coeffs[1] / (2 * coeffs[0]), lo, hi))
        return xv, float(np.polyval(coeffs, xv - x[i]))
    sign = -1.0 if kind == "fold_up" else 1.0
    f = curve.evaluator
    res = minimize_scalar(lambda t: sign * f(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * max(1.0, hi)})
    xv = float(res.x)
    return xv, float(f(xv))


def turning_points(curve: IOCurve, refine: bool = True) -> list[TurningPoint]:
    """Sign changes of ``dI_in/dx``, optionally refined, sorted by ``x``."""
    if len(curve) < 3:
        return []
    signs = _slope_signs(curve.I_in)
    out = []
    for k in range(1, signs.size):
        if signs[k - 1] == signs[k] or signs[k] == 0 or signs[k - 1] == 0:
            continue
        kind: FoldKind = "fold_up" if signs[k - 1] > 0 else "fold_down"
        if refine:
            xv, Iv = _refine(curve, k, kind)
        else:
            xv, Iv = float(curve.x[k]), float(curve.I_in[k])
        out.append(TurningPoint(xv, xv * xv, Iv, kind))
    return _drop_grazing(out)


def _drop_grazing(tps: list[TurningPoint]) -> list[TurningPoint]:
    tps = list(tps)
    k = 0
    while k + 1 < len(tps):
        a, b = tps[k], tps[k + 1]
        if abs(a.I_in - b.I_in) <= GRAZING_TOL * max(1.0, abs(a.I_in)):
            del tps[k:k + 2]
            k = max(k - 1, 0)
        else:
            k += 1
    return tps


# ---------------------------------------------------------------------------
# regions and multiplicity
# ---------------------------------------------------------------------------

def multiplicity(curve: IOCurve, I_in_query: float) -> int:
    """Number of grid crossings of ``I_in = I_in_query``.

    A sample exactly at the query counts as below it (half-open), so a
    tangential touch is not counted.
    """
    above = curve.I_in > I_in_query
    return int(np.count_nonzero(above[1:] != above[:-1]))


def fold_pairs(tps: Sequence[TurningPoint]) -> list[tuple[TurningPoint, TurningPoint]]:
    """Each ``fold_up`` with the ``fold_down`` that follows it."""
    pairs = []
    for a, b in zip(tps, tps[1:]):
        if a.kind == "fold_up" and b.kind == "fold_down" and b.I_in < a.I_in:
            pairs.append((a, b))
    return pairs


def bistable_regions(curve: IOCurve, tps: Optional[Sequence[TurningPoint]] = None) -> list[Region]:
    """Disjoint multistable intervals of ``I_in``, overlaps merged."""
    if tps is None:
        tps = turning_points(curve)
    spans = sorted(((down.I_in, up.I_in, (up, down)) for up, down in fold_pairs(tps)),
                   key=lambda span: span[:2])
    merged: list[list] = []
    for lo, hi, folds in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
            merged[-1][2].extend(folds)
        else:
            merged.append([lo, hi, list(folds)])
    regions = []
    for lo, hi, folds in merged:
        edges = sorted({lo, hi, *(tp.I_in for tp in folds)})
        probes = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
        mult = max(multiplicity(curve, q) for q in probes)
        regions.append(Region(lo, hi, mult, tuple(sorted(folds, key=lambda t: t.x))))
    return regions


# ---------------------------------------------------------------------------
# hysteresis
# ---------------------------------------------------------------------------

@dataclass
class _Branch:
    x: np.ndarray
    I: np.ndarray

    def covers(self, q: float) -> bool:
        tol = GRAZING_TOL * max(1.0, abs(q))
        return self.I[0] - tol <= q <= self.I[-1] + tol


def stable_branches(curve: IOCurve, tps: Optional[Sequence[TurningPoint]] = None) -> list[_Branch]:
    """Rising pieces of the curve, cut at (refined) folds."""
    if tps is None:
        tps = turning_points(curve)
    cuts = [curve.x[0]] + [tp.x for tp in tps] + [curve.x[-1]]
    fold_I = {tp.x: tp.I_in for tp in tps}
    branches = []
    for a, b in zip(cuts, cuts[1:]):
        inside = (curve.x > a) & (curve.x < b)
        xs = np.concatenate([[a], curve.x[inside], [b]])
        Is = np.concatenate([[fold_I.get(a, curve.I_in[0])], curve.I_in[inside],
                             [fold_I.get(b, curve.I_in[-1])]])
        if xs.size >= 2 and Is[-1] > Is[0]:
            keep = np.concatenate([[True], np.diff(xs) > 0])
            branches.append(_Branch(xs[keep], np.maximum.accumulate(Is[keep])))
    return branches


def _invert(curve: IOCurve, br: _Branch, q: float) -> float:
    k = int(np.searchsorted(br.I, q))
    if k < br.I.size and br.I[k] == q:
        return float(br.x[k])
    k = min(max(k, 1), br.I.size - 1)
    x0, x1 = br.x[k - 1], br.x[k]
    if curve.evaluator is not None:
        f = lambda t: curve.evaluator(t) - q  # noqa: E731
        f0, f1 = f(x0), f(x1)
        if f0 == 0:
            return float(x0)
        if f1 == 0:
            return float(x1)
        if f0 * f1 < 0:
            return float(brentq(f, x0, x1, xtol=1e-14, rtol=4 * np.finfo(float).eps))
    return float(np.interp(q, br.I[k - 1:k + 1], br.x[k - 1:k + 1]))


def hysteresis(curve: IOCurve, direction: Literal["up", "down"], I_in_path,
               tps: Optional[Sequence[TurningPoint]] = None) -> list[tuple[float, float]]:
    """Quasi-static branch following along a monotone input path.

    The state stays on its stable branch until the branch ends at a fold,
    then jumps at constant ``I_in`` to the nearest stable branch in the
    sweep direction. Returns ``(I_in, I_T)`` pairs; inputs outside every
    branch are skipped.
    """
    path = [float(q) for q in I_in_path]
    steps = np.diff(path)
    if direction == "up" and np.any(steps < 0) or direction == "down" and np.any(steps > 0):
        raise ValueError(f"I_in_path must be monotone for a {direction}-sweep")
    branches = stable_branches(curve, tps)
    fold_x = {tp.x for tp in (turning_points(curve) if tps is None else tps)}
    up = direction == "up"
    trace = []
    current: Optional[int] = None
    x_now = 0.0

    def landing(q):
        options = [(k, _invert(curve, b, q)) for k, b in enumerate(branches) if b.covers(q)]
        if current is not None:
            options = [o for o in options if (o[1] > x_now if up else o[1] < x_now)]
        if not options:
            return None
        return (min if up else max)(options, key=lambda o: o[1])

    for q in path:
        if current is not None and branches[current].covers(q):
            x_now = _invert(curve, branches[current], q)
            trace.append((q, x_now * x_now))
            br = branches[current]
            end_x, end_I = (br.x[-1], br.I[-1]) if up else (br.x[0], br.I[0])
            at_fold = end_x in fold_x and abs(q - end_I) <= GRAZING_TOL * max(1.0, abs(q))
            if not at_fold:
                continue
            # sitting exactly on the fold: the jump happens at this input
            jump = landing(q)
            if jump is not None:
                current, x_now = jump
                trace.append((q, x_now * x_now))
            continue
        jump = landing(q)
        if jump is None:
            continue
        current, x_now = jump
        trace.append((q, x_now * x_now))
    return trace


# ---------------------------------------------------------------------------
# reports and trends
# ---------------------------------------------------------------------------

def analyze(curve: IOCurve, label: str = "", path_points: int = 401) -> BistabilityReport:
    tps = turning_points(curve)
    regions = bistable_regions(curve, tps)
    top = float(curve.I_in[-1])
    path = np.unique(np.concatenate([np.linspace(0.0, top, path_points),
                                     [tp.I_in for tp in tps if tp.I_in <= top]]))
    up = hysteresis(curve, "up", path, tps)
    down = hysteresis(curve, "down", path[::-1], tps)
    return BistabilityReport(tps, regions, up, down, label=label)


@dataclass
class TrendResult:
    key: str
    scope: str
    expected: str
    observed: list
    passed: bool
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


TrendKey = Literal["lower_threshold", "upper_threshold", "region_count"]


def _extract(report: BistabilityReport, key: str, scope: str):
    if key == "region_count":
        return report.region_count
    if not report.regions:
        return None
    if scope == "outermost":
        return getattr(report, key)
    if scope == "lowest":
        return getattr(report.regions[0], key)
    if scope == "highest":
        return getattr(report.regions[-1], key)
    if scope == "each":
        return [getattr(r, key) for r in report.regions]
    raise ValueError(f"unknown scope {scope!r}")


def _ordered(seq, expected: str, strict: bool) -> bool:
    d = np.diff(np.asarray(seq, dtype=float))
    if expected == "increasing":
        return bool(np.all(d > 0) if strict else np.all(d >= 0))
    if expected == "decreasing":
        return bool(np.all(d < 0) if strict else np.all(d <= 0))
    if expected == "constant":
        return bool(np.all(d == 0))
    raise ValueError(f"unknown order {expected!r}")


def trend_compare(reports: Sequence[BistabilityReport], key: TrendKey, expected_order: str,
                  scope: str = "outermost", strict: bool = True) -> TrendResult:
    """Ordinal check of one report quantity along a parameter axis.

    ``scope`` selects which region a threshold comes from: ``outermost``
    (lowest switch-down / highest switch-up over all regions), ``lowest``
    or ``highest`` region by input intensity, or ``each`` region index by
    index (requires equal region counts).
    """
    if len(reports) < 2:
        return TrendResult(key, scope, expected_order, [], False, "need at least two reports")
    observed = [_extract(r, key, scope) for r in reports]
    result = TrendResult(key, scope, expected_order, observed, False)
    if any(v is None for v in observed):
        result.diagnostic = "a report has no bistable region"
        return result
    if scope == "each" and key != "region_count":
        counts = {len(v) for v in observed}
        if len(counts) != 1:
            result.diagnostic = f"incomparable reports: region counts {[len(v) for v in observed]}"
            return result
        result.passed = all(_ordered(col, expected_order, strict) for col in zip(*observed))
        return result
    result.passed = _ordered(observed, expected_order, strict)
    return result
