"""
Physical configuration of the cavity + multi-level atom system.

Every frequency, rate and Rabi frequency is expressed in units of a common
atomic linewidth Gamma. Levels are numbered 1..4 with |1> the ground state.

Scheme ``A``: the cavity mode drives |1>->|2> and |1>->|3>; a free-space
control field couples |4>->|3>. The probe detuning is measured from
|1>->|3>, and |2> lies ``delta_23`` below |3>.

Scheme ``B``: the cavity mode drives |1>->|2>, |1>->|3> and |1>->|4>.
The probe detuning is measured from |1>->|4>; the excited levels are
ordered |2> < |3> < |4> with separations ``delta_23`` and ``delta_34``.

An 85Rb D2 realisation of both schemes (level assignments only):

- A: |1> = 5S1/2 F=2, |2> = 5P3/2 F'=1, |3> = 5P3/2 F'=2, |4> = 5S1/2 F=3
- B: |1> = 5S1/2 F=2, |2> = 5P3/2 F'=1, |3> = 5P3/2 F'=2, |4> = 5P3/2 F'=3
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

import yaml

from .errors import ConfigError

SchemeId = Literal["A", "B"]
IOMode = Literal["as_printed", "physical"]
GeneratorMode = Literal["corrected_lindblad", "as_printed"]

IO_MODES = ("as_printed", "physical")
GENERATOR_MODES = ("corrected_lindblad", "as_printed")


@dataclass(frozen=True)
class LevelScheme:
    """Level structure, separations and decay channels of one scheme.

    ``branch_24`` and ``branch_34`` are optional extra spontaneous decay
    channels |2>->|4> and |3>->|4>; both default to zero.
    """

    scheme_id: SchemeId = "A"
    delta_23: float = 12.0
    delta_34: float = 0.0
    gamma_2: float = 1.0
    gamma_3: float = 1.0
    gamma_4: float = 1.0
    branch_24: float = 0.0
    branch_34: float = 0.0

    n_levels = 4
    ground = 1

    @property
    def delta_24(self) -> float:
        return self.delta_23 + self.delta_34

    @property
    def decay_channels(self) -> list[tuple[int, int, float]]:
        """(upper, lower, rate) triples of every spontaneous decay channel."""
        channels = [(2, 1, self.gamma_2), (3, 1, self.gamma_3), (4, 1, self.gamma_4)]
        if self.branch_24:
            channels.append((2, 4, self.branch_24))
        if self.branch_34:
            channels.append((3, 4, self.branch_34))
        return channels

    @property
    def cavity_levels(self) -> tuple[int, ...]:
        return (2, 3) if self.scheme_id == "A" else (2, 3, 4)


@dataclass(frozen=True)
class SystemConfig:
    """All physical parameters of one simulation, in units of Gamma.

    ``omega_c`` and ``delta_control`` only exist in scheme A. ``kappa`` is
    used by the ``physical`` input-output mode only. ``dipole_weights``
    holds one relative dipole ratio per cavity-coupled transition, ordered
    by upper level; ``None`` means all ones.
    """

    scheme: LevelScheme = field(default_factory=LevelScheme)
    C: float = 90.0
    delta_p: float = 0.0
    delta_c: float = -6.0
    omega_c: float = 0.0
    delta_control: float = 0.0
    dipole_weights: Optional[tuple[float, ...]] = None
    io_mode: IOMode = "as_printed"
    kappa: float = 1.0
    generator_mode: GeneratorMode = "corrected_lindblad"

    @property
    def weights(self) -> tuple[float, ...]:
        if self.dipole_weights is None:
            return (1.0,) * len(self.scheme.cavity_levels)
        return tuple(float(w) for w in self.dipole_weights)

    def replace(self, **changes) -> "SystemConfig":
        """Return a copy with flat configuration keys overridden.

        Accepts the same keys as the configuration file, so scheme-level
        fields such as ``delta_23`` can be set directly.
        """
        flat = self.to_dict()
        unknown = set(changes) - set(flat)
        if unknown:
            raise ConfigError([f"unknown key {k!r}" for k in sorted(unknown)])
        flat.update(changes)
        return SystemConfig.from_dict(flat)

    # -- flat dictionary (configuration file) representation --------------

    def to_dict(self) -> dict:
        s = self.scheme
        return {
            "scheme": s.scheme_id,
            "C": self.C,
            "delta_p": self.delta_p,
            "delta_c": self.delta_c,
            "delta_23": s.delta_23,
            "delta_34": s.delta_34,
            "omega_c": self.omega_c,
            "delta_control": self.delta_control,
            "gamma_2": s.gamma_2,
            "gamma_3": s.gamma_3,
            "gamma_4": s.gamma_4,
            "branch_24": s.branch_24,
            "branch_34": s.branch_34,
            "io_mode": self.io_mode,
            "kappa": self.kappa,
            "generator_mode": self.generator_mode,
            "dipole_weights": None if self.dipole_weights is None else list(self.dipole_weights),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError([f"unknown key {k!r}" for k in sorted(unknown)])
        d = dict(data)
        scheme_id = str(d.pop("scheme", "A")).upper()
        defaults = default_config(scheme_id if scheme_id in ("A", "B") else "A").to_dict()
        defaults.update(d)
        d = defaults
        scheme = LevelScheme(
            scheme_id=scheme_id,
            delta_23=float(d["delta_23"]),
            delta_34=float(d["delta_34"]),
            gamma_2=float(d["gamma_2"]),
            gamma_3=float(d["gamma_3"]),
            gamma_4=float(d["gamma_4"]),
            branch_24=float(d["branch_24"]),
            branch_34=float(d["branch_34"]),
        )
        weights = d["dipole_weights"]
        return cls(
            scheme=scheme,
            C=float(d["C"]),
            delta_p=float(d["delta_p"]),
            delta_c=float(d["delta_c"]),
            omega_c=float(d["omega_c"]),
            delta_control=float(d["delta_control"]),
            dipole_weights=None if weights is None else tuple(float(w) for w in weights),
            io_mode=d["io_mode"],
            kappa=float(d["kappa"]),
            generator_mode=d["generator_mode"],
        )


CONFIG_KEYS = (
    "scheme", "C", "delta_p", "delta_c", "delta_23", "delta_34", "omega_c",
    "delta_control", "gamma_2", "gamma_3", "gamma_4", "branch_24", "branch_34",
    "io_mode", "kappa", "generator_mode", "dipole_weights",
)


def default_config(scheme: SchemeId = "A") -> SystemConfig:
    """Baseline parameters: the C=90 three-level curve for A, the
    delta_23=5, delta_34=10, delta_p=-12.5 four-level curve for B."""
    if scheme == "A":
        return SystemConfig(scheme=LevelScheme("A", delta_23=12.0), C=90.0,
                            delta_p=0.0, delta_c=-6.0)
    if scheme == "B":
        return SystemConfig(scheme=LevelScheme("B", delta_23=5.0, delta_34=10.0),
                            C=90.0, delta_p=-12.5, delta_c=0.0)
    raise ConfigError(f"unknown scheme {scheme!r}")


def load_config(path) -> SystemConfig:
    """Read a YAML (or JSON) configuration file with flat keys."""
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping of configuration keys")
    config = SystemConfig.from_dict(data)
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    return config


def validate(config: SystemConfig) -> list[str]:
    """Return every invariant violation of ``config``; empty means valid."""
    problems = []
    s = config.scheme
    if s.scheme_id not in ("A", "B"):
        problems.append(f"scheme must be A or B, got {s.scheme_id!r}")
    numbers = {**config.to_dict()}
    for key, value in numbers.items():
        if isinstance(value, float) and not math.isfinite(value):
            problems.append(f"{key} must be finite")
    if not config.C >= 0:
        problems.append("C >= 0")
    if not config.kappa > 0:
        problems.append("kappa > 0")
    if not config.omega_c >= 0:
        problems.append("omega_c >= 0")
    for name in ("gamma_2", "gamma_3", "gamma_4", "branch_24", "branch_34"):
        if not getattr(s, name) >= 0:
            problems.append(f"{name} >= 0")
    for name in ("delta_23", "delta_34"):
        if not getattr(s, name) >= 0:
            problems.append(f"{name} >= 0")
    if s.scheme_id == "B" and config.omega_c != 0:
        problems.append("no control field in scheme B (omega_c must be 0)")
    if config.io_mode not in IO_MODES:
        problems.append(f"io_mode must be one of {IO_MODES}")
    if config.generator_mode not in GENERATOR_MODES:
        problems.append(f"generator_mode must be one of {GENERATOR_MODES}")
    if s.scheme_id in ("A", "B") and len(config.weights) != len(s.cavity_levels):
        problems.append(f"dipole_weights needs {len(s.cavity_levels)} entries for scheme {s.scheme_id}")
    return problems


@dataclass(frozen=True)
class CavityTransition:
    lower: int
    upper: int
    weight: float
    detuning: float


@dataclass(frozen=True)
class CavityDrive:
    """Cavity-driven transitions plus the scheme-A control drive.

    Detunings follow the probe: transition 1->j sees ``delta_p`` shifted by
    the separation of |j> from the reference level.
    """

    transitions: tuple[CavityTransition, ...]
    control_rabi: float = 0.0
    control_detuning: float = 0.0
    control_levels: tuple[int, int] = (4, 3)

    def detuning(self, upper: int) -> float:
        for t in self.transitions:
            if t.upper == upper:
                return t.detuning
        raise KeyError(upper)


def derive_drives(config: SystemConfig) -> CavityDrive:
    s = config.scheme
    if s.scheme_id == "B" and config.omega_c != 0:
        raise ConfigError("no control field in scheme B (omega_c must be 0)")
    dp = config.delta_p
    if s.scheme_id == "A":
        detunings = {2: dp + s.delta_23, 3: dp}
    elif s.scheme_id == "B":
        detunings = {2: dp + s.delta_24, 3: dp + s.delta_34, 4: dp}
    else:
        raise ConfigError(f"unknown scheme {s.scheme_id!r}")
    transitions = tuple(
        CavityTransition(1, j, w, detunings[j]) for j, w in zip(s.cavity_levels, config.weights)
    )
    if s.scheme_id == "A":
        return CavityDrive(transitions, config.omega_c, config.delta_control)
    return CavityDrive(transitions)


def with_scheme(config: SystemConfig, **scheme_changes) -> SystemConfig:
    return dataclasses.replace(config, scheme=dataclasses.replace(config.scheme, **scheme_changes))
