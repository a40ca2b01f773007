import json

import numpy as np
import pytest

from magflow.cli import main
from magflow.config import (ConfigError, field_from_spec,
                            group_point_from_spec, load_config)
import magflow.algebra as al


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


HEIS_MANE = {
    "group": "heisenberg3",
    "inertia": "identity",
    "alpha": [1.0, 0.0, 1.0],
}


# --- config validation -----------------------------------------------------

def test_load_config_rejects_unknown_keys(tmp_path):
    cfg = dict(HEIS_MANE, bogus=1)
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "c.json", cfg))


def test_load_config_rejects_bad_group(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "c.json", {"group": "su5"}))


def test_load_config_rejects_nonfinite(tmp_path):
    cfg = dict(HEIS_MANE, alpha=[1.0, None, 1.0])
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg).replace("null", "NaN"))
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_load_config_rejects_wrong_alpha_length(tmp_path):
    cfg = dict(HEIS_MANE, alpha=[1.0, 0.0])
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "c.json", cfg))


def test_kappa_auto_resolution(tmp_path):
    cfg = load_config(_write(tmp_path, "c.json", dict(HEIS_MANE)))
    assert cfg.resolve_kappa(0.5) == 2.0
    cfg2 = load_config(_write(tmp_path, "c2.json",
                              dict(HEIS_MANE, kappa=3.5)))
    assert cfg2.resolve_kappa(0.5) == 3.5


def test_group_point_and_field_specs():
    alg = al.so3()
    g = group_point_from_spec({"exp": [0.1, 0.2, 0.3]}, alg)
    assert al.constraint_residual(g, alg) <= 1e-12
    f = field_from_spec({"kind": "cos", "amplitude": 0.5, "wavenumber": 2},
                        8, 32)
    x = np.linspace(0, 2 * np.pi, 33)[:-1]
    assert np.max(np.abs(f.grid_values(32) - 0.5 * np.cos(2 * x))) <= 1e-12
    with pytest.raises(ConfigError):
        field_from_spec({"kind": "triangle"}, 8, 32)


# --- subcommands -----------------------------------------------------------

def test_cmd_mane_heisenberg(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", HEIS_MANE)
    assert main(["mane", "--config", cfg, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "mane.json").read_text())
    assert abs(report["critical_value"] - 0.5) <= 1e-12
    assert report["annihilator_dim"] == 2


def test_cmd_mane_so3(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "group": "so3", "inertia": "identity", "alpha": [1.0, 0.0, 0.0]})
    assert main(["mane", "--config", cfg, "--out", str(tmp_path),
                 "--quiet"]) == 0
    report = json.loads((tmp_path / "mane.json").read_text())
    assert abs(report["critical_value"] - 0.5) <= 1e-12
    assert report["annihilator_dim"] == 0


def test_cmd_mane_is_deterministic(tmp_path):
    cfg = _write(tmp_path, "c.json", HEIS_MANE)
    main(["mane", "--config", cfg, "--out", str(tmp_path / "a"), "--quiet"])
    main(["mane", "--config", cfg, "--out", str(tmp_path / "b"), "--quiet"])
    assert ((tmp_path / "a" / "mane.json").read_bytes()
            == (tmp_path / "b" / "mane.json").read_bytes())


def test_invalid_config_exits_2(tmp_path):
    cfg = _write(tmp_path, "c.json", dict(HEIS_MANE, bogus=1))
    assert main(["mane", "--config", cfg, "--quiet"]) == 2


def test_cmd_flow_zero_velocity(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "group": "so3", "inertia": "identity", "alpha": [0.0, 0.0, 0.7],
        "flow": {"u0": [0.0, 0.0, 0.0], "T": 1.0, "dt": 0.01}})
    assert main(["flow", "--config", cfg, "--out", str(tmp_path),
                 "--quiet"]) == 0
    rows = (tmp_path / "trajectory.csv").read_text().strip().splitlines()
    assert len(rows) == 102  # header + 101 samples
    report = json.loads((tmp_path / "flow.json").read_text())
    assert report["energy_drift"] == 0.0


def test_cmd_flow_dual_reports_conjugacy(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "group": "se2", "inertia": "identity", "alpha": [0.3, 0.1, 0.0],
        "flow": {"u0": [0.5, -0.2, 0.4], "T": 1.0, "dt": 0.001}})
    assert main(["flow", "--config", cfg, "--out", str(tmp_path), "--dual",
                 "--quiet"]) == 0
    report = json.loads((tmp_path / "flow.json").read_text())
    assert report["conjugacy_gap"] <= 1e-6
    assert report["energy_drift"] <= 1e-8


def test_cmd_connect_degenerate(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "group": "heisenberg3", "inertia": "identity",
        "alpha": [1.0, 0.0, 1.0], "kappa": 2.0,
        "connect": {"x": {"exp": [0, 0, 0]}, "y": {"exp": [0, 0, 0]}}})
    assert main(["connect", "--config", cfg, "--out", str(tmp_path),
                 "--quiet"]) == 0
    report = json.loads((tmp_path / "connect.json").read_text())
    assert report["degenerate"] is True


def test_cmd_connect_subcritical_exits_3(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "group": "heisenberg3", "inertia": "identity",
        "alpha": [1.0, 0.0, 1.0], "kappa": 0.25,
        "connect": {"x": {"exp": [0, 0, 0]}, "y": {"exp": [0.3, 0, 0]}}})
    assert main(["connect", "--config", cfg, "--out", str(tmp_path),
                 "--quiet"]) == 3


def test_cmd_connect_small_target(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "group": "heisenberg3", "inertia": "identity",
        "alpha": [1.0, 0.0, 1.0], "kappa": 2.0,
        "connect": {"x": {"exp": [0, 0, 0]}, "y": {"exp": [0.3, 0.2, 0.1]},
                    "N_steps": 32, "seeds": 2}})
    assert main(["connect", "--config", cfg, "--out", str(tmp_path),
                 "--quiet"]) == 0
    report = json.loads((tmp_path / "connect.json").read_text())
    assert report["endpoint_error"] <= 1e-6
    assert (tmp_path / "geodesic.csv").exists()


def test_cmd_epdiff_zero_solution(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "group": "vect_s1_truncated", "group_params": {"modes": 16},
        "epdiff": {"u0": {"kind": "zero"}, "a": {"kind": "constant",
                   "value": 0.2}, "T": 1.0, "dt": 0.01, "s": 1, "N": 16}})
    assert main(["epdiff", "--config", cfg, "--out", str(tmp_path),
                 "--quiet"]) == 0
    report = json.loads((tmp_path / "epdiff.json").read_text())
    assert report["energy_drift"] == 0.0
    assert (tmp_path / "energy.csv").exists()
    assert (tmp_path / "snapshots.csv").exists()


def test_cmd_check_runs_named_suite(tmp_path):
    assert main(["check", "lorentz-skew", "--out", str(tmp_path),
                 "--quiet"]) == 0
    report = json.loads((tmp_path / "check_lorentz-skew.json").read_text())
    assert report["lorentz-skew"]["passed"] is True


def test_cmd_check_unknown_suite_exits_2(tmp_path):
    assert main(["check", "no-such-suite", "--out", str(tmp_path),
                 "--quiet"]) == 2
