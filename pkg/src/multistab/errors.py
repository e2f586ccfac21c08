"""Exception types raised by the simulation pipeline."""


class MultistabError(Exception):
    """Base class for all library errors."""


class ConfigError(MultistabError, ValueError):
    """An invalid physical configuration or configuration file."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class SolverError(MultistabError):
    """The steady-state linear system is singular or badly conditioned."""

    def __init__(self, message, condition=None, x=None):
        self.condition = condition
        self.x = x
        if x is not None:
            message = f"{message} (x={x!r})"
        super().__init__(message)


class ConvergenceError(MultistabError):
    """Relaxation integration did not reach a fixed point within ``t_max``."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (last residual {residual:.3e})")
