"""Steady-state density matrices at fixed intracavity field."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bloch import DIM, POPULATION_INDICES, Generator, build_generator, generator_parts
from .errors import ConvergenceError, SolverError
from .model import SystemConfig

CONDITION_LIMIT = 1e12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True)
class DensityMatrix:
    """4x4 atomic state ``sigma[m-1, n-1] = sigma_mn``.

    ``residual`` is the max-norm of ``A vec(sigma)`` over the rows that
    were not replaced by the trace constraint. ``from_printed`` flags
    states obtained from the literal (non trace-conserving) equations.
    """

    sigma: np.ndarray
    residual: float = 0.0
    condition: float = float("nan")
    from_printed: bool = False

    def __getitem__(self, mn):
        m, n = mn
        return self.sigma[m - 1, n - 1]

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.sigma))

    def violations(self) -> list[str]:
        """Invariant violations (Hermiticity, unit trace, positivity)."""
        return state_violations(self.sigma)


def state_violations(sigma: np.ndarray) -> list[str]:
    out = []
    herm = float(np.max(np.abs(sigma - sigma.conj().T)))
    if herm > HERMITIAN_TOL:
        out.append(f"non-Hermitian by {herm:.3e}")
    tr = abs(np.trace(sigma) - 1.0)
    if tr > TRACE_TOL:
        out.append(f"trace off by {tr:.3e}")
    evals = np.linalg.eigvalsh(0.5 * (sigma + sigma.conj().T))
    if evals.min() < -POSITIVITY_TOL:
        out.append(f"negative eigenvalue {evals.min():.3e}")
    return out


def _closure(A: np.ndarray, population: int = 1) -> tuple[np.ndarray, np.ndarray, int]:
    """Replace the ``population``-th population row by the trace constraint."""
    row = POPULATION_INDICES[population - 1]
    M = np.array(A, dtype=complex, copy=True)
    M[..., row, :] = 0.0
    M[..., row, list(POPULATION_INDICES)] = 1.0
    b = np.zeros(M.shape[:-1], dtype=complex)
    b[..., row] = 1.0
    return M, b, row


def solve_steady(gen: Generator, closure_population: int = 1) -> DensityMatrix:
    """Solve ``A vec(sigma) = 0`` with ``trace(sigma) = 1``.

    The sigma_11 row is replaced by the trace condition unless another
    population is chosen via ``closure_population``.
    """
    printed = gen.mode == "as_printed"
    if printed:
        warnings.warn("steady state from the literal printed equations (not trace conserving)",
                      stacklevel=2)
    M, b, row = _closure(gen.A, closure_population)
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SolverError(f"steady-state system is singular (condition {cond:.3e})",
                          condition=cond, x=gen.x)
    v = np.linalg.solve(M, b)
    r = gen.A @ v
    r[row] = 0.0
    return DensityMatrix(v.reshape(DIM, DIM), float(np.max(np.abs(r))), cond, printed)


def solve_steady_many(config: SystemConfig, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Steady states for an array of field amplitudes in one batched solve.

    Returns ``(sigma, residual, condition)`` with shapes ``(n, 4, 4)``,
    ``(n,)`` and ``(n,)``. Each point is solved independently, so results
    do not depend on how a grid is split into batches.
    """
    xs = np.asarray(xs, dtype=float)
    A0, A1 = generator_parts(config)
    A = A0[None, :, :] + xs[:, None, None] * A1[None, :, :]
    M, b, row = _closure(A)
    cond = np.linalg.cond(M)
    bad = ~np.isfinite(cond) | (cond > CONDITION_LIMIT)
    if bad.any():
        k = int(np.argmax(bad))
        raise SolverError(f"steady-state system is singular (condition {cond[k]:.3e})",
                          condition=float(cond[k]), x=float(xs[k]))
    v = np.linalg.solve(M, b[..., None])[..., 0]
    r = np.einsum("kij,kj->ki", A, v)
    r[:, row] = 0.0
    return v.reshape(-1, DIM, DIM), np.max(np.abs(r), axis=1), cond


@dataclass(frozen=True)
class Relaxation:
    state: DensityMatrix
    t: float
    converged: bool = True


def relax_to_steady(config: SystemConfig, x: float, t_max: float = 500.0,
                    tol: float = 1e-8, atol: float = 1e-10, rtol: float = 1e-10,
                    first_step: float = 1e-3) -> Relaxation:
    """Integrate from the ground state until ``max|d sigma/dt| < tol``.

    Uses an explicit adaptive Dormand-Prince 8(5,3) integrator; stops at the
    first time the max-norm of the derivative drops below ``tol``.
    """
    gen = build_generator(config, x)
    A = np.array(gen.A)
    y0 = np.zeros(DIM * DIM, dtype=complex)
    y0[0] = 1.0

    def rate(y):
        return float(np.max(np.abs(A @ y)))

    if rate(y0) < tol:
        return Relaxation(DensityMatrix(y0.reshape(DIM, DIM), rate(y0)), 0.0)

    def settled(t, y):
        return rate(y) - tol

    settled.terminal = True
    settled.direction = -1

    sol = solve_ivp(lambda t, y: A @ y, (0.0, t_max), y0, method="DOP853",
                    rtol=rtol, atol=atol, first_step=first_step, events=settled)
    y = sol.y[:, -1]
    last = rate(y)
    if sol.status != 1 and last >= tol:
        raise ConvergenceError(f"relaxation not converged by t={t_max}", last)
    return Relaxation(DensityMatrix(y.reshape(DIM, DIM), last), float(sol.t[-1]))


def two_level_steady(rabi: float, detuning: float, gamma: float) -> tuple[float, complex]:
    """Closed-form two-level steady state ``(sigma_ee, sigma_ge)``.

    Same conventions as the generator: ``d sigma_ge/dt = -(gamma/2 + i
    detuning) sigma_ge + i rabi (sigma_ee - sigma_gg)``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    see = 4 * rabi**2 / (gamma**2 + 4 * detuning**2 + 8 * rabi**2)
    sge = 1j * rabi * (2 * see - 1) / (gamma / 2 + 1j * detuning)
    return see, complex(sge)
