import numpy as np
import pytest

from multistab.model import default_config


def two_level(C=10.0, delta_p=0.0, gamma=1.0):
    """Scheme A with the |1>-|2> coupling switched off: a driven two-level atom."""
    return default_config("A").replace(C=C, delta_p=delta_p, gamma_3=gamma,
                                       omega_c=0.0, dipole_weights=[0.0, 1.0])


def random_hermitian(rng, trace_one=True):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = m @ m.conj().T
    return h / np.trace(h).real if trace_one else h


def random_config(rng):
    """Draw from the randomized parameter box used for solver cross-checks."""
    scheme = "A" if rng.random() < 0.5 else "B"
    changes = dict(C=rng.uniform(0, 400), delta_p=rng.uniform(-15, 15),
                   delta_23=rng.uniform(0, 15), delta_34=rng.uniform(0, 15))
    if scheme == "A":
        changes.update(omega_c=rng.uniform(0, 0.2), delta_control=rng.uniform(-15, 15))
    return default_config(scheme).replace(**changes), rng.uniform(0, 30)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
