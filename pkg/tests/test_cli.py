import json

import numpy as np
import numpy.testing as npt
import pytest

from projdyn.cli import main
from projdyn.dynamics import integrate_free
from projdyn.io import read_trajectory_csv, write_trajectory_csv
from projdyn.problems import projection_instance


def run(tmp_path, command, config, *extra):
    tmp_path.mkdir(parents=True, exist_ok=True)
    cfg = tmp_path / f"{command}.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


FREE_LINE = {
    "problem": "free",
    "dim": 2,
    "t_end": 3.0,
    "field": {"kind": "zero"},
    "screen": {"kind": "quadric"},
    "initial": {"q": [1, 0], "p": [0, 1]},
}


def test_simulate_free_line(tmp_path):
    code, out = run(tmp_path, "simulate", FREE_LINE)
    assert code == 0
    traj = read_trajectory_csv(out / "trajectory.csv")
    npt.assert_allclose(traj.q, np.column_stack([np.ones_like(traj.t), traj.t]), atol=1e-12)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["steps"]["accepted"] == len(traj) - 1
    npt.assert_allclose(summary["final"]["q"], [1.0, 3.0], atol=1e-12)


def test_simulate_is_deterministic(tmp_path):
    run(tmp_path / "a", "simulate", {"problem": "neumann", "t_end": 1.0, "seed": 3})
    run(tmp_path / "b", "simulate", {"problem": "neumann", "t_end": 1.0, "seed": 3})
    a = (tmp_path / "a" / "out" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "b" / "out" / "trajectory.csv").read_bytes()


def test_simulate_neumann_energy(tmp_path):
    code, out = run(tmp_path, "simulate", {"problem": "neumann", "t_end": 10.0, "seed": 7})
    summary = json.loads((out / "summary.json").read_text())
    assert code == 0
    assert summary["energy_drift"] <= 1e-9
    assert summary["h_drift"] <= 1e-12


def test_simulate_jacobi_eta(tmp_path):
    code, out = run(tmp_path, "simulate", {"problem": "jacobi", "nu": 0.5, "t_end": 10.0})
    summary = json.loads((out / "summary.json").read_text())
    assert code == 0
    assert summary["eta_drift"] <= 1e-8


def test_seed_flag_overrides(tmp_path):
    cfg = {"problem": "neumann", "t_end": 0.5, "seed": 1}
    run(tmp_path / "a", "simulate", cfg, "--seed", "2")
    summary = json.loads((tmp_path / "a" / "out" / "summary.json").read_text())
    assert summary["seed"] == 2


def test_config_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "simulate", {"problem": "bogus"})
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_domain_error_exit_code(tmp_path, capsys):
    cfg = {"problem": "free", "dim": 2, "field": {"kind": "kepler"}, "initial": {"q": [1, 0], "p": [0, 0]}}
    code, _ = run(tmp_path, "simulate", cfg)
    assert code == 3
    assert "t=1.1107" in capsys.readouterr().err


def test_project_line_onto_circle(tmp_path):
    run(tmp_path, "simulate", FREE_LINE)
    src = tmp_path / "out" / "trajectory.csv"
    cfg = {
        "problem": "constrained",
        "dim": 2,
        "field": {"kind": "zero"},
        "screen": {"kind": "quadric"},
        "source": str(src),
        "reference": True,
        "verify": {"deviation_tol": 1e-8},
    }
    code, out = run(tmp_path, "project", cfg)
    assert code == 0
    proj = read_trajectory_csv(out / "projected.csv", parameter="tau")
    npt.assert_allclose(proj.q, np.column_stack([np.cos(proj.t), np.sin(proj.t)]), atol=1e-8)
    assert json.loads((out / "summary.json").read_text())["deviation"] <= 1e-8


def test_project_on_screen_source_keeps_time(tmp_path):
    code, _ = run(tmp_path, "simulate", {"problem": "neumann", "t_end": 2.0})
    src = tmp_path / "out" / "trajectory.csv"
    code, out = run(tmp_path, "project", {"screen": {"kind": "G"}, "source": str(src)})
    assert code == 0
    proj = read_trajectory_csv(out / "projected.csv")
    npt.assert_allclose(proj.channels["tau"], proj.t, atol=1e-12)


def test_project_braden_against_neumann(tmp_path, options):
    field, screen, state = projection_instance(0)
    free = integrate_free(field, state, 50.0, options, screen=screen, tau_end=1.0)
    src = write_trajectory_csv(tmp_path / "free.csv", free)
    cfg = {
        "dim": 3,
        "G": field.params["G"].entries.tolist(),
        "A": field.params["A"].entries.tolist(),
        "field": {"kind": "braden"},
        "screen": {"kind": "G"},
        "source": str(src),
        "reference": True,
    }
    code, out = run(tmp_path, "project", cfg)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["tau_final"] >= 1.0
    assert summary["deviation"] <= 1e-6


def test_project_missing_source(tmp_path):
    code, _ = run(tmp_path, "project", {"source": str(tmp_path / "missing.csv")})
    assert code == 2


def test_verify_degree_minus_two_fails(tmp_path):
    code, out = run(tmp_path, "verify", {"verify": {"projection_field": "degree-2", "groups": ["projection"]}})
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert "projection_equivalence" in failed


def test_verify_coarse_rtol_fails_drift_checks(tmp_path):
    code, out = run(tmp_path, "verify", {"verify": {"groups": ["energy_multiplier", "correspondence"]}}, "--rtol", "1e-3")
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert {"energy_multiplier_unit_sphere_energy", "eta_drift_nu0.5"} <= failed


@pytest.mark.slow
def test_verify_default_suite_passes(tmp_path):
    code, out = run(tmp_path, "verify", {})
    report = json.loads((out / "report.json").read_text())
    assert code == 0 and report["passed"]
    assert len(report["checks"]) >= 30


@pytest.mark.parametrize("nu", [0.0, 0.5])
def test_correspond(tmp_path, nu):
    code, out = run(tmp_path, "correspond", {"problem": "jacobi", "nu": nu, "t_end": 10.0})
    report = json.loads((out / "correspond.json").read_text())
    assert code == 0
    assert report["multiplier_gap"] <= 1e-7
    assert report["chain_deviation"] <= 1e-6


def test_correspond_trivial_exchange(tmp_path):
    eye = np.eye(3).tolist()
    code, _ = run(tmp_path, "correspond", {"problem": "jacobi", "G": eye, "A": eye, "t_end": 5.0})
    assert code == 0
