import json

import numpy as np
import pytest

from randode.cli import main, selfcheck
from randode.config import parse_config
from randode.errors import ConfigError
from randode.problems import CATALOG_KEYS


BASE = {
    "mode": "convergence",
    "problem": "linear_decay",
    "integrator": "euler",
    "noise": {"name": "gauss_endpoint", "p": 1.0},
    "tau_grid": [0.0625, 0.03125, 0.015625, 0.0078125],
    "reps": 60,
    "seed": 12,
}


def _write(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return str(path)


def test_defaults_fill_in():
    cfg = parse_config({})
    assert cfg.mode == "convergence"
    assert cfg.problem.name == "linear_decay"
    assert cfg.reps == 200
    assert cfg.tau_grid[0] == 2.0 ** -4
    assert cfg.echo["seed"] == 0


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        parse_config({"modee": "convergence"})
    with pytest.raises(ConfigError):
        parse_config({"noise": {"name": "zero", "family": "zero"}})
    with pytest.raises(ConfigError):
        parse_config({"mode": "divination"})


def test_mesh_validation():
    with pytest.raises(ConfigError, match="tau"):
        parse_config({"tau_grid": [0.3], "horizon_T": 1.0})


def test_implicit_cap_validation():
    # lorenz63 declares beta = 19, so implicit steps need tau < 1/38
    raw = {"problem": "lorenz63", "integrator": "implicit_euler",
           "tau_grid": [0.05], "horizon_T": 1.0}
    with pytest.raises(ConfigError, match=r"min\(tau_star"):
        parse_config(raw)
    raw["tau_grid"] = [0.02]
    parse_config(raw)  # below the cap: accepted


def test_run_and_exit_codes(tmp_path):
    cfg = _write(tmp_path, BASE)
    out = str(tmp_path / "out")
    assert main(["run", cfg, "--out-dir", out]) == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["verdict"] == "pass"
    assert manifest["config"]["reps"] == 60
    assert "convergence_n1.csv" in manifest["outputs"]


def test_determinism_and_thread_invariance(tmp_path):
    cfg = _write(tmp_path, BASE)
    for name, extra in [("a", []), ("b", []), ("c", ["--threads", "4"])]:
        assert main(["run", cfg, "--out-dir", str(tmp_path / name)] + extra) == 0
    ref = (tmp_path / "a" / "convergence_n1.csv").read_bytes()
    assert (tmp_path / "b" / "convergence_n1.csv").read_bytes() == ref
    assert (tmp_path / "c" / "convergence_n1.csv").read_bytes() == ref


def test_replay_matches(tmp_path):
    cfg = _write(tmp_path, BASE)
    out = str(tmp_path / "out")
    assert main(["run", cfg, "--out-dir", out]) == 0
    assert main(["replay", out + "/manifest.json",
                 "--out-dir", str(tmp_path / "replayed")]) == 0


def test_override_c2_forces_failure(tmp_path):
    raw = {"mode": "bounds", "problem": "cubic_dissipative",
           "integrator": "implicit_euler",
           "noise": {"name": "gauss_endpoint", "p": 1.5},
           "tau_grid": [0.0625], "reps": 1000, "seed": 5}
    cfg = _write(tmp_path, raw)
    out = str(tmp_path / "oc")
    assert main(["run", cfg, "--out-dir", out, "--override-c2", "0.001"]) == 2
    manifest = json.loads((tmp_path / "oc" / "manifest.json").read_text())
    assert manifest["verdict"] == "fail"


def test_execution_error_exit_code(tmp_path):
    cfg = _write(tmp_path, {"tau_grid": [0.3]})
    assert main(["run", cfg]) == 1


def test_list_commands(capsys):
    assert main(["list-problems"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out == list(CATALOG_KEYS)
    assert main(["list-noise"]) == 0


def test_selfcheck_clean():
    assert selfcheck(cases=5_000, seed=1) == 0


def test_seed_and_reps_flags(tmp_path):
    cfg = _write(tmp_path, BASE)
    out = str(tmp_path / "seeded")
    assert main(["run", cfg, "--out-dir", out, "--seed", "99",
                 "--reps", "40"]) == 0
    manifest = json.loads((tmp_path / "seeded" / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 99
    assert manifest["config"]["reps"] == 40


def test_json_format_output(tmp_path):
    cfg = _write(tmp_path, BASE)
    out = tmp_path / "jout"
    assert main(["run", cfg, "--out-dir", str(out), "--format", "json"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["manifest"]["verdict"] == "pass"
    assert "results" in report
