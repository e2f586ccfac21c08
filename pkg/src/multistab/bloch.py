"""
Semiclassical generators ``d vec(sigma)/dt = A vec(sigma)`` at fixed field.

Index convention (the only place it is defined): ``sigma_mn = <m|rho|n>``
and ``vec`` is row-major, so ``vec(sigma)[4*(m-1) + (n-1)] = sigma_mn``.
With this convention the optical coherence rows read, e.g.

    d sigma_13/dt = -(gamma_3/2 + i delta_p) sigma_13 + i Omega_2 (sigma_33 - sigma_11) + ...

The absorption calibration of the input-output relation lives in
:mod:`multistab.iocurve`.

Rotating-frame level energies are ``E_j = -Delta_j`` for the cavity
transitions 1->j, and ``E_4 = delta_control - delta_p`` for the scheme-A
control level, so ``delta_control == delta_p`` is two-photon resonance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .model import SystemConfig, derive_drives, validate

DIM = 4
POPULATION_INDICES = tuple(DIM * k + k for k in range(DIM))


def vec_index(m: int, n: int) -> int:
    return DIM * (m - 1) + (n - 1)


def projector(m: int, n: int) -> np.ndarray:
    """|m><n| as a 4x4 matrix (1-based levels)."""
    out = np.zeros((DIM, DIM), dtype=complex)
    out[m - 1, n - 1] = 1.0
    return out


_EYE = np.eye(DIM)


def commutator_superop(H: np.ndarray) -> np.ndarray:
    """Superoperator of ``-i[H, .]`` in the row-major convention."""
    return -1j * (np.kron(H, _EYE) - np.kron(_EYE, H.T))


def dissipator_superop(L: np.ndarray) -> np.ndarray:
    """Superoperator of ``L . L^+ - {L^+ L, .}/2``."""
    LdL = L.conj().T @ L
    return np.kron(L, L.conj()) - 0.5 * np.kron(LdL, _EYE) - 0.5 * np.kron(_EYE, LdL.T)


@dataclass(frozen=True)
class Generator:
    """Generator matrix ``A`` built for one field amplitude ``x``."""

    A: np.ndarray
    x: float
    config: SystemConfig

    @property
    def mode(self) -> str:
        return self.config.generator_mode

    def apply(self, sigma: np.ndarray) -> np.ndarray:
        """Time derivative of the 4x4 matrix ``sigma``."""
        return (self.A @ np.asarray(sigma).reshape(-1)).reshape(DIM, DIM)


def build_generator(config: SystemConfig, x: float) -> Generator:
    if x < 0:
        raise ValueError(f"field amplitude must be non-negative, got {x}")
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    A0, A1 = generator_parts(config)
    A = A0 + x * A1
    A.setflags(write=False)
    return Generator(A, float(x), config)


def generator_parts(config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Split ``A(x) = A0 + x * A1``; both modes are linear in the field.

    The returned arrays are shared cache entries and must not be mutated.
    """
    return _generator_parts(config)


@lru_cache(maxsize=256)
def _generator_parts(config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    if config.generator_mode == "as_printed":
        A0 = _printed_matrix(config, 0.0)
        A1 = _printed_matrix(config, 1.0) - A0
    else:
        A0, A1 = _lindblad_parts(config)
    A0.setflags(write=False)
    A1.setflags(write=False)
    return A0, A1


def _lindblad_parts(config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    drive = derive_drives(config)
    H0 = np.zeros((DIM, DIM), dtype=complex)
    H1 = np.zeros((DIM, DIM), dtype=complex)
    for t in drive.transitions:
        H0[t.upper - 1, t.upper - 1] = -t.detuning
        H1 += -t.weight * (projector(t.upper, 1) + projector(1, t.upper))
    if config.scheme.scheme_id == "A":
        H0[3, 3] = drive.control_detuning - config.delta_p
        upper, lower = 3, 4
        H0 += -drive.control_rabi * (projector(upper, lower) + projector(lower, upper))
    A0 = commutator_superop(H0)
    for upper, lower, rate in config.scheme.decay_channels:
        if rate:
            A0 = A0 + dissipator_superop(np.sqrt(rate) * projector(lower, upper))
    return A0, commutator_superop(H1)


# ---------------------------------------------------------------------------
# Literal ("as printed") equations of motion, kept uncorrected so that
# their defects can be measured against the Lindblad generator.
#
# Each row maps a row label to (m, n) and {(a, b): coefficient}.
# The conjugate row (n, m) is generated with conjugated coefficients and
# swapped indices. Stray operator symbols ("a", "a+", "g2 a") are read as
# the c-number Rabi frequency of the same transition.
# ---------------------------------------------------------------------------

def printed_rows(config: SystemConfig, x: float) -> dict[int, tuple[tuple[int, int], dict]]:
    s = config.scheme
    w = config.weights
    i = 1j
    dp = config.delta_p
    g2, g3, g4 = s.gamma_2, s.gamma_3, s.gamma_4
    if s.scheme_id == "A":
        O1, O2 = w[0] * x, w[1] * x
        c1, c2 = np.conj(O1), np.conj(O2)
        Oc = config.omega_c
        cc = np.conj(Oc)
        D = config.delta_control
        d23 = s.delta_23
        return {
            2: ((1, 1), {(2, 2): g2, (3, 3): g3, (4, 4): g4, (2, 1): i * c1, (1, 2): -i * O1,
                         (3, 1): i * c2, (1, 3): -i * O2}),
            3: ((2, 2), {(2, 2): -g2, (1, 2): i * O1, (2, 1): -i * c1}),
            4: ((3, 3), {(3, 3): -g3, (1, 3): i * O2, (3, 1): -i * c2, (4, 3): i * Oc,
                         (3, 4): -i * cc}),
            5: ((4, 4), {(2, 2): g4, (3, 3): g4, (4, 4): -g4, (3, 4): i * cc, (4, 3): -i * Oc}),
            6: ((2, 3), {(2, 3): -((g2 + g3) / 2 - i * d23), (1, 3): i * O1, (2, 1): -i * c2,
                         (2, 4): -i * cc}),
            7: ((4, 2), {(4, 2): -(g2 / 2 + i * (D - dp)), (4, 1): -i * c1, (3, 2): i * cc}),
            8: ((4, 3), {(4, 3): -(g3 / 2 + i * D), (3, 3): i * cc, (4, 4): -i * cc,
                         (4, 1): -i * c2}),
            9: ((1, 2), {(1, 2): -(g2 / 2 + i * (dp + d23)), (2, 2): i * c1, (1, 1): -i * c1,
                         (3, 2): i * c2}),
            10: ((1, 3), {(1, 3): -(g3 / 2 + i * dp), (3, 3): i * c2, (1, 1): -i * c2,
                          (2, 3): i * c1, (1, 4): -i * cc}),
            11: ((1, 4), {(1, 4): -(g4 / 2 + i * (D - dp)), (2, 4): i * c1, (3, 4): i * c2,
                          (1, 3): -i * Oc}),
        }
    O1, O2, O3 = w[0] * x, w[1] * x, w[2] * x
    c1, c2, c3 = np.conj(O1), np.conj(O2), np.conj(O3)
    d23, d34, d24 = s.delta_23, s.delta_34, s.delta_24
    return {
        17: ((1, 1), {(2, 2): g2, (3, 3): g3, (4, 4): g4,
                      (2, 1): i * O1, (1, 2): -i * c1,
                      (3, 1): i * O2, (1, 3): -i * c2,
                      (4, 1): i * O3, (1, 4): -i * c3}),
        18: ((2, 2), {(2, 2): -g2, (2, 1): -i * O1, (1, 2): i * c1}),
        19: ((3, 3), {(3, 3): -g3, (3, 1): -i * O2, (1, 3): i * c2}),
        20: ((4, 4), {(4, 4): -g4, (4, 1): -i * O3, (1, 4): i * c3}),
        21: ((1, 2), {(1, 2): -(g2 / 2 + i * (dp + d24)), (2, 2): i * c1, (1, 1): -i * c1,
                      (3, 2): i * c2, (4, 2): i * c3}),
        22: ((1, 3), {(1, 3): -(g3 / 2 + i * (dp + d34)), (3, 3): i * c2, (1, 1): -i * c2,
                      (3, 2): i * c1, (4, 3): i * c3}),
        23: ((1, 4), {(1, 4): -(g4 / 2 + i * dp), (4, 4): i * c3, (1, 1): -i * c3,
                      (2, 4): i * c1, (3, 4): i * c2}),
        24: ((2, 3), {(2, 3): (g2 + g3) / 2 - 2j * d23, (1, 3): i * c1, (2, 1): -i * O2}),
        25: ((3, 4), {(3, 4): (g3 + g4) / 2 - 2j * d34, (1, 4): i * c2, (3, 1): -i * O3}),
        26: ((2, 4), {(2, 4): (g2 + g4) / 2 - 2j * d24, (1, 4): i * c1, (2, 1): -i * O3}),
    }


def _printed_matrix(config: SystemConfig, x: float) -> np.ndarray:
    A = np.zeros((DIM * DIM, DIM * DIM), dtype=complex)
    for (m, n), row in printed_rows(config, x).values():
        for (a, b), coeff in row.items():
            A[vec_index(m, n), vec_index(a, b)] += coeff
            if m != n:
                A[vec_index(n, m), vec_index(b, a)] += np.conj(coeff)
    return A


def printed_equation_residuals(config: SystemConfig, x: float, sigma) -> dict[int, float]:
    """``|literal rhs - Lindblad rhs|`` for every literal row at ``sigma``.

    Keys are the row labels of :func:`printed_rows` (2..11 for scheme A,
    17..26 for scheme B). Branching channels configured on the scheme enter the
    Lindblad side only.
    """
    sigma = np.asarray(sigma, dtype=complex).reshape(DIM, DIM)
    corrected = build_generator(config.replace(generator_mode="corrected_lindblad"), x)
    rhs = corrected.apply(sigma)
    out = {}
    for number, ((m, n), row) in printed_rows(config, x).items():
        printed = sum(coeff * sigma[a - 1, b - 1] for (a, b), coeff in row.items())
        out[number] = float(abs(printed - rhs[m - 1, n - 1]))
    return out


def population_row_sum(gen: Generator, sigma) -> complex:
    """Sum of the population derivatives, i.e. d(trace)/dt."""
    return complex(np.trace(gen.apply(sigma)))
