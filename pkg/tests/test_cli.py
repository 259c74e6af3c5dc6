import csv
import json

import pytest
from click.testing import CliRunner

from gridflux import acceptance, cli

CONFIGS = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def invoke(runner, *args, env=None):
    return runner.invoke(cli.main, [str(a) for a in args], env=env)


def test_simulate_success_writes_artifacts(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_step", "tf": 4.0})
    out = tmp_path / "run"
    res = invoke(runner, "simulate", "--config", cfg, "--out", out)
    assert res.exit_code == 0, res.output
    for name in ("trajectory.csv", "summary.json", "resolved_config.json"):
        assert (out / name).is_file()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["settled"] is True and summary["collapsed"] is False
    assert summary["events"][0][1] == "load_step"
    header = (out / "trajectory.csv").read_text().splitlines()[0].split(",")
    assert header[:3] == ["time", "i_L1", "v1"]


def test_simulate_collapse_exit_code(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_step", "controller": {"kind": "pi_two_loop"}})
    out = tmp_path / "pi"
    res = invoke(runner, "simulate", "--config", cfg, "--out", out)
    assert res.exit_code == 2
    assert json.loads((out / "summary.json").read_text())["collapsed"] is True
    assert (out / "trajectory.csv").is_file()


def test_simulate_config_error(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_step", "rlc": {"L": -0.01}})
    res = invoke(runner, "simulate", "--config", cfg, "--out", tmp_path / "x")
    assert res.exit_code == 1
    assert "rlc.L" in res.output
    assert not (tmp_path / "x").exists()


def test_simulate_missing_config(runner, tmp_path):
    res = invoke(runner, "simulate", "--config", tmp_path / "nope.json")
    assert res.exit_code == 1


def test_resolved_config_reproduces_outputs(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_fluct", "tf": 0.5, "controller": {"kind": "pd"}})
    a, b = tmp_path / "a", tmp_path / "b"
    assert invoke(runner, "simulate", "--config", cfg, "--out", a, "--seed", 3).exit_code == 0
    assert invoke(runner, "simulate", "--config", a / "resolved_config.json", "--out", b).exit_code == 0
    for name in ("trajectory.csv", "summary.json", "resolved_config.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_set_and_env_output(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_step"})
    env_out = tmp_path / "env"
    res = invoke(runner, "simulate", "--config", cfg, "--set", "tf=2.5", "--set", "controller.kind=pd",
                 env={"GRIDFLUX_OUT": str(env_out)})
    assert res.exit_code == 0, res.output
    resolved = json.loads((env_out / "resolved_config.json").read_text())
    assert resolved["tf"] == 2.5 and resolved["controller"]["kind"] == "pd"


def test_seed_range(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_fluct", "tf": 0.1})
    res = invoke(runner, "simulate", "--config", cfg, "--seed", 2**64 - 1, "--out", tmp_path / "s")
    assert res.exit_code == 0, res.output
    res = invoke(runner, "simulate", "--config", cfg, "--seed", -1)
    assert res.exit_code != 0


@pytest.mark.parametrize("name, code, verdict", [
    ("stable_pair.json", 0, "stable"),
    ("strong_coupling.json", 3, "indeterminate"),
])
def test_stability_fixtures(runner, tmp_path, name, code, verdict):
    res = invoke(runner, "stability", "--config", CONFIGS / name, "--out", tmp_path, "--oracle")
    assert res.exit_code == code
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["verdict"] == verdict
    assert "oracle_max_real_eig" in report


def test_stability_unstable_subsystem(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "stability_sweep", "stability": {"subsystems": [{"A": [[0.1]]}]}})
    res = invoke(runner, "stability", "--config", cfg, "--out", tmp_path)
    assert res.exit_code == 4
    assert json.loads((tmp_path / "report.json").read_text())["verdict"] == "subsystem_unstable"


def test_stability_sweep_report(runner, tmp_path):
    res = invoke(runner, "stability", "--config", CONFIGS / "sweep.json", "--out", tmp_path, "--oracle")
    assert res.exit_code == 3
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["sweep"]) == 7
    assert all(e["oracle_hurwitz"] for e in report["sweep"])
    assert report["transitions_at_b_tie"] == []


def test_stability_config_error(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_step"})
    assert invoke(runner, "stability", "--config", cfg, "--out", tmp_path).exit_code == 1
    bad = write(tmp_path, {"scenario": "stability_sweep", "stability": {"subsystems": [{"A": [[1, 2]]}]}},
                "bad.json")
    assert invoke(runner, "stability", "--config", bad, "--out", tmp_path).exit_code == 1


def read_rows(path):
    with open(path, newline="") as fh:
        return {r["controller"]: r for r in csv.DictReader(fh)}


def test_compare_step_matrix(runner, tmp_path):
    res = invoke(runner, "compare", "--config", CONFIGS / "compare_step.json", "--out", tmp_path,
                 "--set", "tf=3.5")
    assert res.exit_code == 0, res.output
    rows = read_rows(tmp_path / "comparison.csv")
    assert list(rows) == ["pi_two_loop", "pd", "energy_single", "energy_two_ts"]
    assert rows["pi_two_loop"]["collapsed"] == "True"
    assert rows["pd"]["settled"] == "True"
    assert rows["energy_single"]["settled"] == "False"
    assert rows["energy_two_ts"]["settled"] == "True"
    assert float(rows["energy_two_ts"]["max_port_dP"]) < 1e-3


def test_compare_fluct_variance(runner, tmp_path):
    res = invoke(runner, "compare", "--config", CONFIGS / "compare_fluct.json", "--out", tmp_path,
                 "--set", "tf=4")
    assert res.exit_code == 0, res.output
    rows = read_rows(tmp_path / "comparison.csv")
    std = {k: float(r["v_std_after"]) for k, r in rows.items() if r["v_std_after"]}
    assert min(std, key=std.get) == "energy_two_ts"


def test_compare_empty_list(runner, tmp_path):
    cfg = write(tmp_path, {"scenario": "rlc_cpl_step", "controllers": []})
    assert invoke(runner, "compare", "--config", cfg, "--out", tmp_path).exit_code == 1


def test_accept_exit_codes(runner, monkeypatch):
    ok = acceptance.Criterion("X1", "always", True, "fine")
    bad = acceptance.Criterion("X2", "never", False, "broken")
    monkeypatch.setattr(acceptance, "CRITERIA", (lambda: ok,))
    res = invoke(runner, "accept")
    assert res.exit_code == 0 and "[PASS] X1" in res.output
    monkeypatch.setattr(acceptance, "CRITERIA", (lambda: ok, lambda: bad))
    res = invoke(runner, "accept")
    assert res.exit_code == 1 and "[FAIL] X2" in res.output


def test_write_atomic_leaves_no_temp_files(tmp_path):
    cli.write_atomic(tmp_path / "a" / "f.txt", "hello\n")
    assert [p.name for p in (tmp_path / "a").iterdir()] == ["f.txt"]
