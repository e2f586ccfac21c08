import json

import pytest

from multistab.errors import ConfigError
from multistab.model import (CONFIG_KEYS, LevelScheme, SystemConfig, default_config,
                             derive_drives, load_config, validate)


def test_scheme_a_detunings_at_zero_probe_detuning():
    drive = derive_drives(default_config("A").replace(delta_p=0.0, delta_23=12.0))
    assert drive.detuning(3) == 0.0
    assert drive.detuning(2) == 12.0


def test_scheme_b_detunings():
    cfg = default_config("B").replace(delta_p=-12.5, delta_23=5.0, delta_34=10.0)
    drive = derive_drives(cfg)
    assert drive.detuning(4) == -12.5
    assert drive.detuning(3) == -2.5
    assert drive.detuning(2) == 2.5


def test_degenerate_transitions_share_detuning():
    drive = derive_drives(default_config("A").replace(delta_p=0.0, delta_23=0.0))
    assert drive.detuning(2) == drive.detuning(3) == 0.0


def test_scheme_b_rejects_control_field():
    cfg = SystemConfig(scheme=LevelScheme("B", 5.0, 10.0), omega_c=0.1)
    with pytest.raises(ConfigError):
        derive_drives(cfg)


def test_derive_drives_is_pure():
    cfg = default_config("B")
    assert derive_drives(cfg) == derive_drives(cfg)


def test_scheme_b_separations_are_exact():
    cfg = default_config("B").replace(delta_23=3.3, delta_34=7.1, delta_p=0.37)
    d = derive_drives(cfg)
    assert cfg.scheme.delta_24 == 3.3 + 7.1
    assert d.detuning(2) - d.detuning(3) == pytest.approx(3.3, abs=1e-14)
    assert d.detuning(3) - d.detuning(4) == pytest.approx(7.1, abs=1e-14)


def test_control_drive_in_scheme_a():
    d = derive_drives(default_config("A").replace(omega_c=0.1, delta_control=0.2))
    assert (d.control_rabi, d.control_detuning, d.control_levels) == (0.1, 0.2, (4, 3))


def test_validate_default_is_ok():
    assert validate(default_config("A")) == []
    assert validate(default_config("B")) == []


def test_validate_negative_cooperativity():
    assert "C >= 0" in validate(default_config("A").replace(C=-1.0))


def test_validate_scheme_b_control():
    cfg = SystemConfig(scheme=LevelScheme("B", 5.0, 10.0), omega_c=0.1)
    assert any("no control field in scheme B" in p for p in validate(cfg))


def test_validate_reports_every_problem():
    cfg = default_config("A").replace(C=-1.0, kappa=0.0, omega_c=-0.5, gamma_2=-1.0)
    problems = validate(cfg)
    assert len(problems) == 4


def test_validate_rejects_non_finite():
    assert validate(default_config("A").replace(delta_p=float("nan")))


def test_level_scheme_fixed_structure():
    s = default_config("B").scheme
    assert (s.n_levels, s.ground) == (4, 1)
    assert [c[:2] for c in s.decay_channels] == [(2, 1), (3, 1), (4, 1)]


def test_branching_channels_listed():
    s = default_config("A").replace(branch_24=0.2, branch_34=0.3).scheme
    assert (2, 4, 0.2) in s.decay_channels and (3, 4, 0.3) in s.decay_channels


def test_config_round_trip():
    cfg = default_config("B").replace(C=12.0, dipole_weights=[1.0, 0.5, 2.0])
    assert SystemConfig.from_dict(cfg.to_dict()) == cfg
    assert set(cfg.to_dict()) == set(CONFIG_KEYS)


def test_unknown_key_is_an_error():
    with pytest.raises(ConfigError):
        SystemConfig.from_dict({"scheme": "A", "Cee": 3})
    with pytest.raises(ConfigError):
        default_config("A").replace(bogus=1)


def test_load_yaml_and_json(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("scheme: B\nC: 40\ndelta_p: -8\n")
    cfg = load_config(p)
    assert (cfg.scheme.scheme_id, cfg.C, cfg.delta_p) == ("B", 40.0, -8.0)
    q = tmp_path / "c.json"
    q.write_text(json.dumps(cfg.to_dict()))
    assert load_config(q) == cfg


def test_load_invalid_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("C: -3\n")
    with pytest.raises(ConfigError, match="C >= 0"):
        load_config(p)
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(p)
