import numpy as np
import pytest

from multistab.bloch import (DIM, POPULATION_INDICES, build_generator, generator_parts,
                             printed_equation_residuals, population_row_sum, vec_index)
from multistab.model import default_config, derive_drives

from conftest import random_hermitian

PRINTED_A = default_config("A").replace(generator_mode="as_printed", omega_c=0.1,
                                        delta_control=0.4, delta_p=1.3)


def test_ground_state_stationary_without_drive():
    gen = build_generator(default_config("A").replace(omega_c=0.0), 0.0)
    ground = np.zeros(16, dtype=complex)
    ground[0] = 1.0
    assert np.max(np.abs(gen.A @ ground)) == 0.0


def test_negative_field_rejected():
    with pytest.raises(ValueError):
        build_generator(default_config("A"), -0.1)


def test_generator_is_immutable():
    gen = build_generator(default_config("A"), 1.0)
    with pytest.raises(ValueError):
        gen.A[0, 0] = 1.0


@pytest.mark.parametrize("scheme", ["A", "B"])
def test_trace_conservation(scheme, rng):
    cfg = default_config(scheme).replace(**({"omega_c": 0.15} if scheme == "A" else {}))
    gen = build_generator(cfg, 2.3)
    for _ in range(10):
        assert abs(population_row_sum(gen, random_hermitian(rng))) < 1e-12


def test_printed_population_sum_is_gamma4_feed(rng):
    gen = build_generator(PRINTED_A, 0.8)
    for _ in range(5):
        s = random_hermitian(rng)
        expected = PRINTED_A.scheme.gamma_4 * (s[1, 1] + s[2, 2])
        assert population_row_sum(gen, s) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("mode", ["corrected_lindblad", "as_printed"])
@pytest.mark.parametrize("scheme", ["A", "B"])
def test_hermiticity_propagation(mode, scheme, rng):
    gen = build_generator(default_config(scheme).replace(generator_mode=mode), 1.7)
    for _ in range(5):
        d = gen.apply(random_hermitian(rng))
        assert np.max(np.abs(d - d.conj().T)) < 1e-12


@pytest.mark.parametrize("scheme", ["A", "B"])
def test_damped_spectrum(scheme):
    cfg = default_config(scheme).replace(**({"omega_c": 0.2} if scheme == "A" else {}))
    ev = np.linalg.eigvals(build_generator(cfg, 4.0).A)
    assert ev.real.max() <= 1e-9


def test_undriven_spectrum_gap():
    cfg = default_config("A").replace(gamma_2=0.7, gamma_3=1.3, gamma_4=0.4)
    A = build_generator(cfg, 0.0).A
    ev = np.linalg.eigvals(A)
    k = np.argmin(np.abs(ev))
    assert abs(ev[k]) < 1e-12
    others = np.delete(ev, k)
    assert others.real.max() <= -0.4 / 2 + 1e-9
    null = np.linalg.svd(A)[2][-1].conj()
    assert np.allclose(np.abs(null), np.eye(16)[0])


@pytest.mark.parametrize("scheme", ["A", "B"])
def test_sigma23_rotation_rate(scheme):
    cfg = default_config(scheme).replace(delta_23=7.25, delta_p=-1.1)
    A = build_generator(cfg, 1.0).A
    d = derive_drives(cfg)
    assert A[vec_index(2, 3), vec_index(2, 3)].imag == d.detuning(2) - d.detuning(3)
    assert d.detuning(2) - d.detuning(3) == pytest.approx(7.25, abs=1e-14)


def test_generator_linear_in_field():
    cfg = default_config("B")
    A0, A1 = generator_parts(cfg)
    assert np.allclose(build_generator(cfg, 2.5).A, A0 + 2.5 * A1, atol=0)


def test_residuals_vanish_for_defect_free_equations(rng):
    s = random_hermitian(rng)
    res = printed_equation_residuals(PRINTED_A, 0.7, s)
    for eq in (2, 3, 4, 6, 9, 10):
        assert res[eq] < 1e-12


def test_residuals_localize_known_defects(rng):
    s = random_hermitian(rng)
    res = printed_equation_residuals(PRINTED_A, 0.7, s)
    for eq in (5, 7, 8, 11):
        assert res[eq] > 1e-3


def test_residuals_vanish_when_defects_are_switched_off(rng):
    # no decay of |4>, two-photon resonance, and the |2>-|4> Raman detuning nulled
    cfg = PRINTED_A.replace(gamma_4=0.0, delta_p=-12.0, delta_control=-12.0)
    res = printed_equation_residuals(cfg, 0.7, random_hermitian(rng))
    for eq in (2, 6, 7, 8, 9, 10, 11):
        assert res[eq] < 1e-12


def test_feed_row_residual_zero_without_excited_population():
    s = np.zeros((4, 4), dtype=complex)
    s[0, 0], s[3, 3] = 0.6, 0.4
    s[0, 3] = s[3, 0] = 0.1
    assert printed_equation_residuals(PRINTED_A, 0.7, s)[5] < 1e-12


def test_excited_coherence_row_residual_is_two():
    cfg = default_config("B").replace(delta_23=0.0, gamma_2=1.0, gamma_3=1.0)
    s = np.zeros((DIM, DIM), dtype=complex)
    s[1, 2] = s[2, 1] = 1.0
    assert printed_equation_residuals(cfg, 0.0, s)[24] == pytest.approx(2.0, abs=1e-12)


def test_scheme_b_population_and_optical_rows_match(rng):
    res = printed_equation_residuals(default_config("B"), 1.1, random_hermitian(rng))
    for eq in (17, 18, 19, 20, 21, 23):
        assert res[eq] < 1e-12


def test_population_indices():
    assert POPULATION_INDICES == tuple(vec_index(k, k) for k in range(1, 5))
