import json

import numpy as np
import pytest

from multistab.analysis import turning_points
from multistab.bloch import build_generator
from multistab.errors import ConfigError, SolverError
from multistab.iocurve import (IOCurve, auto_x_max, default_grid, detuning_phase, input_intensity,
                               output_to_input, sweep, weak_probe_spectrum)
from multistab.model import default_config
from multistab.steady import solve_steady

from conftest import two_level

BASELINE = default_config("A").replace(C=90.0, delta_23=12.0, delta_p=0.0, delta_c=-6.0)


def test_empty_cavity_relation():
    cfg = BASELINE.replace(C=0.0)
    state = solve_steady(build_generator(cfg, 1.0))
    y = output_to_input(1.0, state, cfg)
    assert y == 2.0
    assert abs(y) ** 2 == 4.0


def test_zero_field_gives_zero_input():
    state = solve_steady(build_generator(BASELINE, 0.0))
    assert output_to_input(0.0, state, BASELINE) == 0.0


def test_two_level_input_field():
    cfg = two_level(C=10.0)
    y = output_to_input(0.5, solve_steady(build_generator(cfg, 0.5)), cfg)
    assert y.real == pytest.approx(1 + 10 / 3, abs=1e-12)
    assert y.imag == pytest.approx(0.0, abs=1e-12)
    assert abs(y) ** 2 == pytest.approx(18.7777777778, abs=1e-9)


def test_physical_mode_adds_detuning_term():
    cfg = BASELINE.replace(io_mode="physical", kappa=2.0)
    assert detuning_phase(cfg) == pytest.approx(2 * (-6.0 - 0.0) / 2.0)
    assert detuning_phase(BASELINE) == 0.0
    state = solve_steady(build_generator(cfg, 1.3))
    diff = output_to_input(1.3, state, cfg) - output_to_input(1.3, state, BASELINE)
    assert diff == pytest.approx(1j * detuning_phase(cfg) * 1.3, abs=1e-12)


def test_sweep_empty_cavity_grid():
    curve = sweep(BASELINE.replace(C=0.0), [0.0, 1.0, 2.0])
    assert np.array_equal(curve.I_in, [0.0, 4.0, 16.0])
    assert np.array_equal(curve.I_T, [0.0, 1.0, 4.0])


def test_empty_cavity_whole_grid():
    curve = sweep(BASELINE.replace(C=0.0), np.linspace(0, 50, 101))
    assert np.max(np.abs(curve.I_in - 4 * curve.I_T)) <= 1e-12


def test_baseline_curve_is_multivalued():
    curve = sweep(BASELINE, default_grid(BASELINE))
    assert len(turning_points(curve)) >= 4
    assert np.any(np.diff(curve.I_in) < 0)


def test_weak_drive_prefix_is_linear():
    xs = np.linspace(1e-6, 1e-3, 50)
    for cfg in (BASELINE, default_config("B")):
        curve = sweep(cfg, xs)
        ratio = curve.I_in / curve.I_T
        assert np.ptp(ratio) / ratio.mean() < 0.01


def test_sweep_validates_grid():
    with pytest.raises(ValueError):
        sweep(BASELINE, [0.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        sweep(BASELINE, [-1.0, 1.0])
    with pytest.raises(ConfigError):
        sweep(BASELINE.replace(C=-2.0), [0.0, 1.0])


def test_sweep_reports_offending_point():
    cfg = BASELINE.replace(gamma_2=0.0, gamma_3=0.0, gamma_4=0.0)
    with pytest.raises(SolverError) as info:
        sweep(cfg, [0.0, 1.0])
    assert info.value.x == 0.0


def test_sweep_thread_count_does_not_change_result():
    xs = np.linspace(0, 60, 1500)
    a = sweep(BASELINE, xs, threads=1, chunk=100)
    b = sweep(BASELINE, xs, threads=4, chunk=100)
    assert a.to_table() == b.to_table()


def test_grid_refinement_is_stable():
    coarse = sweep(BASELINE, np.linspace(0, 40, 201))
    fine = sweep(BASELINE, np.linspace(0, 40, 401))
    rel = np.abs(fine.I_in[::2] - coarse.I_in) / np.maximum(coarse.I_in, 1e-300)
    assert np.nanmax(rel[1:]) < 1e-6


def test_large_kappa_recovers_as_printed_mode():
    xs = np.linspace(0, 30, 61)
    base = sweep(BASELINE, xs).I_in
    errs = [np.max(np.abs(sweep(BASELINE.replace(io_mode="physical", kappa=k), xs).I_in - base)
                   / np.maximum(base, 1e-12))
            for k in (1e2, 1e4, 1e6)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_curve_table_columns_and_json():
    curve = sweep(BASELINE, [0.0, 0.5, 1.0])
    lines = curve.to_table().splitlines()
    assert lines[0].split("\t") == list(IOCurve.COLUMNS)
    assert len(lines) == 4
    doc = json.loads(curve.to_json())
    assert doc["config"] == BASELINE.to_dict()
    assert len(doc["rows"]) == 3 and doc["rows"][1][0] == 0.5


def test_points_expose_states():
    curve = sweep(BASELINE, [0.0, 2.0])
    p = curve.points[1]
    assert p.I_T == 4.0 and p.I_in == pytest.approx(curve.I_in[1])
    assert p.sigma.violations() == [] and p.residual <= 1e-9


def test_curve_requires_increasing_x():
    with pytest.raises(ValueError):
        IOCurve(np.array([0.0, 0.0]), np.zeros(2))


def test_input_intensity_matches_sweep():
    curve = sweep(BASELINE, [0.0, 3.0])
    assert input_intensity(BASELINE, 3.0) == pytest.approx(curve.I_in[1], rel=1e-12)


def test_auto_x_max_brackets_folds():
    x_max = auto_x_max(BASELINE)
    tail = sweep(BASELINE, np.linspace(x_max / 10, x_max, 401)).I_in
    assert np.all(np.diff(tail) > 0)
    assert auto_x_max(BASELINE.replace(C=0.0)) == 1.0


def test_two_level_spectrum_at_resonance():
    (dp, t), = weak_probe_spectrum(two_level(C=10.0), 1e-4, [0.0])
    assert t == pytest.approx(1 / 484, rel=1e-6)


def test_empty_cavity_spectrum_is_flat():
    spectrum = weak_probe_spectrum(BASELINE.replace(C=0.0), 1e-4, np.linspace(-10, 10, 21))
    assert all(t == pytest.approx(0.25, abs=1e-15) for _, t in spectrum)


def test_spectrum_rejects_strong_probe():
    with pytest.raises(ValueError):
        weak_probe_spectrum(BASELINE, 1e-2, [0.0])


def test_spectrum_can_tie_control_detuning():
    cfg = BASELINE.replace(omega_c=0.1, delta_control=5.0)
    tied = weak_probe_spectrum(cfg, 1e-4, [0.3], tie_control=True)[0][1]
    direct = weak_probe_spectrum(cfg.replace(delta_control=0.3), 1e-4, [0.3])[0][1]
    assert tied == direct


@pytest.mark.parametrize("scheme", ["A", "B"])
def test_passivity_in_linear_regime(scheme):
    base = default_config(scheme)
    xs = np.linspace(1e-5, 1e-3, 5)
    for dp in np.linspace(-20, 20, 41):
        for mode in ("as_printed", "physical"):
            cfg = base.replace(delta_p=float(dp), io_mode=mode)
            curve = sweep(cfg, xs)
            assert np.all(np.abs(curve.y) >= 2 * xs)
