"""
Mean-field input-output relation and output-field sweeps.

Sign calibration: written with ``sigma_1j = <1|rho|j>`` (the convention
of :mod:`multistab.bloch`) the relation ``y = 2x - i C sum sigma_1j`` gives
``|y| < 2x`` in the weak resonant limit, i.e. gain. The atoms here are a
passive absorber, so the optical coherence entering the relation is taken
as ``sigma_j1 = conj(sigma_1j)``, which restores ``|y| >= 2x``.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bloch import build_generator
from .errors import ConfigError, SolverError
from .model import SystemConfig, validate
from .steady import DensityMatrix, solve_steady, solve_steady_many

LINEAR_LIMIT = 1e-3
DEFAULT_GRID = 4001
RESIDUAL_LIMIT = 1e-9


def absorptive_coherences(sigma: np.ndarray, config: SystemConfig) -> complex:
    """``sum_j w_j^2 sigma_j1`` over the cavity-coupled transitions."""
    sigma = np.asarray(sigma)
    total = 0j
    for j, w in zip(config.scheme.cavity_levels, config.weights):
        total = total + w * w * sigma[..., j - 1, 0]
    return total


def detuning_phase(config: SystemConfig) -> float:
    """Mean-field cavity detuning term ``theta``; zero in ``as_printed`` mode."""
    if config.io_mode == "physical":
        return 2.0 * (config.delta_c - config.delta_p) / config.kappa
    return 0.0


def output_to_input(x, sigma, config: SystemConfig):
    """Input amplitude ``y`` for output amplitude ``x`` and steady state ``sigma``.

    Works elementwise on arrays of ``x`` with a matching stack of states.
    """
    if isinstance(sigma, DensityMatrix):
        sigma = sigma.sigma
    x = np.asarray(x, dtype=float)
    y = 2 * x - 1j * config.C * absorptive_coherences(sigma, config)
    theta = detuning_phase(config)
    if theta:
        y = y + 1j * theta * x
    return y if y.ndim else complex(y)


@dataclass(frozen=True)
class IOPoint:
    x: float
    y: complex
    sigma: Optional[DensityMatrix]
    residual: float

    @property
    def I_T(self) -> float:
        return self.x * self.x

    @property
    def I_in(self) -> float:
        return abs(self.y) ** 2


@dataclass(frozen=True, eq=False)
class IOCurve:
    """Samples of the input-output relation along increasing ``x``.

    ``evaluator`` maps a field amplitude to ``I_in``; analysis uses it to
    refine folds. Synthetic curves may carry ``config=None`` and no states.
    """

    x: np.ndarray
    y: np.ndarray
    config: Optional[SystemConfig] = None
    sigma: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    evaluator: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("x must be a non-empty 1-D array")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=complex))

    @classmethod
    def synthetic(cls, x, I_in, evaluator=None) -> "IOCurve":
        """Curve with prescribed ``I_in`` values (``y`` is taken real)."""
        y = np.sqrt(np.asarray(I_in, dtype=float).clip(min=0))
        return cls(np.asarray(x, dtype=float), y.astype(complex), evaluator=evaluator)

    @property
    def I_T(self) -> np.ndarray:
        return self.x**2

    @property
    def I_in(self) -> np.ndarray:
        return np.abs(self.y) ** 2

    def __len__(self):
        return self.x.size

    @property
    def points(self) -> list[IOPoint]:
        out = []
        for k in range(len(self)):
            sigma = None if self.sigma is None else DensityMatrix(self.sigma[k], float(self.residual[k]))
            res = 0.0 if self.residual is None else float(self.residual[k])
            out.append(IOPoint(float(self.x[k]), complex(self.y[k]), sigma, res))
        return out

    # -- serialization ---------------------------------------------------

    COLUMNS = ("x", "I_T", "Re_y", "Im_y", "I_in",
               "sigma11", "sigma22", "sigma33", "sigma44", "residual")

    def rows(self) -> list[tuple[float, ...]]:
        pops = (np.zeros((len(self), 4)) if self.sigma is None
                else np.real(np.diagonal(self.sigma, axis1=1, axis2=2)))
        res = np.zeros(len(self)) if self.residual is None else self.residual
        return [
            (self.x[k], self.I_T[k], self.y[k].real, self.y[k].imag, self.I_in[k],
             *pops[k], res[k])
            for k in range(len(self))
        ]

    def to_table(self, delimiter: str = "\t") -> str:
        lines = [delimiter.join(self.COLUMNS)]
        for row in self.rows():
            lines.append(delimiter.join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "config": None if self.config is None else self.config.to_dict(),
            "columns": list(self.COLUMNS),
            "rows": [[float(v) for v in row] for row in self.rows()],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def input_intensity(config: SystemConfig, x: float) -> float:
    """``I_in`` at a single field amplitude via a fresh steady-state solve."""
    state = solve_steady(build_generator(config, x))
    return abs(output_to_input(x, state, config)) ** 2


def sweep(config: SystemConfig, x_grid: Sequence[float], threads: int = 1,
          chunk: int = 512) -> IOCurve:
    """Steady state and input field at every grid point.

    Points are independent; with ``threads > 1`` chunks are solved in a
    thread pool and reassembled in grid order.
    """
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("x_grid must be a non-empty 1-D sequence")
    if np.any(xs < 0):
        raise ValueError("x_grid must be non-negative")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("x_grid must be strictly increasing")
    pieces = [xs[k:k + chunk] for k in range(0, xs.size, chunk)]
    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: solve_steady_many(config, p), pieces))
    else:
        results = [solve_steady_many(config, p) for p in pieces]
    sigma = np.concatenate([r[0] for r in results])
    residual = np.concatenate([r[1] for r in results])
    worst = int(np.argmax(residual))
    if residual[worst] > RESIDUAL_LIMIT:
        raise SolverError(f"steady-state residual {residual[worst]:.3e} above limit",
                          x=float(xs[worst]))
    y = output_to_input(xs, sigma, config)
    return IOCurve(xs, y, config, sigma, residual,
                   evaluator=lambda x: input_intensity(config, x))


def is_monotone_tail(config: SystemConfig, x_max: float, n: int = 401) -> bool:
    xs = np.linspace(x_max / 10.0, x_max, n)
    sigma, _, _ = solve_steady_many(config, xs)
    I_in = np.abs(output_to_input(xs, sigma, config)) ** 2
    return bool(np.all(np.diff(I_in) > 0))


def auto_x_max(config: SystemConfig, start: float = 1.0, limit: float = 1e5) -> float:
    """Double ``x_max`` until ``I_in`` is increasing on ``[x_max/10, x_max]``."""
    x_max = start
    while not is_monotone_tail(config, x_max):
        x_max *= 2.0
        if x_max > limit:
            raise SolverError(f"no monotone tail found below x_max={limit}")
    return x_max


def default_grid(config: SystemConfig, n: int = DEFAULT_GRID,
                 x_max: Optional[float] = None) -> np.ndarray:
    if x_max is None:
        x_max = auto_x_max(config)
    return np.linspace(0.0, x_max, n)


def weak_probe_spectrum(config: SystemConfig, x_probe: float, delta_p_grid,
                        tie_control: bool = False) -> list[tuple[float, float]]:
    """Linear-regime transmission ``I_T / I_in`` versus probe detuning.

    With ``tie_control`` the scheme-A control detuning follows the probe
    (``delta_control = delta_p``, the double-resonance condition).
    """
    if not 0 < x_probe <= LINEAR_LIMIT:
        raise ValueError(f"x_probe must lie in (0, {LINEAR_LIMIT}] for a linear-regime spectrum")
    out = []
    for dp in delta_p_grid:
        changes = {"delta_p": float(dp)}
        if tie_control:
            changes["delta_control"] = float(dp)
        cfg = config.replace(**changes)
        I_in = input_intensity(cfg, x_probe)
        out.append((float(dp), x_probe * x_probe / I_in))
    return out

