from __future__ import annotations

import json
import subprocess
import sys

import pytest

BASE = [sys.executable, "-m", "kamforge.cli"]


def run_cli(*args):
    return subprocess.run(BASE + list(args), capture_output=True, text=True)


def test_constants_happy_path():
    res = run_cli("constants", "--scheme", "kolmogorov", "--d", "2",
                  "--tau", "1")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["table"]["scheme"] == "Kolmogorov"
    assert payload["config"]["d"] == 2
    assert "C_sharp" in payload["table"]["entries"]


def test_threshold_missing_alpha_exits_2():
    res = run_cli("threshold", "--scheme", "arnold", "--d", "2", "--tau", "1",
                  "--r", "1", "--s", "1", "--sigma", "0.05",
                  "--omega", "0.6,1", "--M", "5.3")
    assert res.returncode == 2
    assert "--alpha" in res.stderr


def test_threshold_poschel_needs_nu():
    res = run_cli("threshold", "--scheme", "poschel", "--d", "2", "--tau", "1",
                  "--alpha", "0.6", "--r", "1e-15", "--s", "1",
                  "--sigma", "0.05", "--omega", "0.6,1", "--M", "5.3")
    assert res.returncode == 2
    assert "--nu" in res.stderr


def test_usage_error_exits_64():
    res = run_cli("no-such-command")
    assert res.returncode == 64
    res = run_cli()
    assert res.returncode == 64


def test_numerical_failure_exits_3():
    # inadmissible Poschel schedule start
    res = run_cli("schedule", "--scheme", "poschel", "--d", "2", "--tau", "1",
                  "--alpha", "0.6", "--r", "1", "--s", "1", "--sigma", "0.05",
                  "--omega", "0.6,1", "--M", "5.3", "--nu", "2.5",
                  "--e0", "1.0", "--jmax", "3")
    assert res.returncode == 3
    assert "HypothesisViolated" in res.stderr


def test_constants_divergent_exits_3():
    res = run_cli("constants", "--scheme", "leb-loc-gen", "--d", "2",
                  "--tau", "1")
    assert res.returncode == 3


@pytest.mark.parametrize("argv", [
    ("constants", "--scheme", "sharp-arnold", "--d", "2", "--tau", "1.5"),
    ("threshold", "--scheme", "arnold", "--d", "2", "--tau", "1",
     "--alpha", "0.618", "--r", "1", "--s", "1", "--sigma", "0.05",
     "--omega", "0.6180339887498949,1", "--M", "5.30527681",
     "--format", "csv"),
    ("schedule", "--scheme", "arnold", "--d", "2", "--tau", "1",
     "--alpha", "0.618", "--r", "1", "--s", "1", "--sigma", "0.05",
     "--omega", "0.618,1", "--M", "5.305", "--eps", "1e-60",
     "--jmax", "8", "--format", "csv"),
    ("measure", "--variant", "mc", "--d", "2", "--tau", "1.5",
     "--alpha", "0.01", "--R", "1", "--samples", "50000", "--seed", "7"),
    ("table", "--alpha", "0.618", "--format", "csv"),
])
def test_subcommands_deterministic(argv):
    a = run_cli(*argv)
    b = run_cli(*argv)
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout
    assert a.stdout


def test_config_file_defaults_and_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[constants]\nscheme = kolmogorov\nd = 2\ntau = 1\n")
    res = run_cli("--config", str(cfg), "constants")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["config"]["tau"] == 1.0
    # argv overrides the file
    res2 = run_cli("--config", str(cfg), "constants", "--tau", "1.5")
    assert json.loads(res2.stdout)["config"]["tau"] == 1.5


def test_config_file_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[constants]\nscheme = kolmogorov\nwhatnot = 3\n")
    res = run_cli("--config", str(cfg), "constants", "--d", "2", "--tau", "1")
    assert res.returncode == 2
    assert "whatnot" in res.stderr


def test_output_file_and_header_round_trip(tmp_path):
    out = tmp_path / "out.json"
    res = run_cli("constants", "--scheme", "arnold", "--d", "2", "--tau", "1",
                  "--output", str(out))
    assert res.returncode == 0 and res.stdout == ""
    payload = json.loads(out.read_text())
    # the echoed config re-parses to the same run
    cfg = payload["config"]
    res2 = run_cli("constants", "--scheme", cfg["scheme"], "--d",
                   str(cfg["d"]), "--tau", str(cfg["tau"]))
    assert json.loads(res2.stdout)["table"] == payload["table"]


def test_iterate_small_run():
    res = run_cli("iterate", "--eps", "1e-3", "--jmax", "2", "--force",
                  "--run-past-floor", "--format", "csv")
    assert res.returncode == 0, res.stderr
    lines = res.stdout.strip().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1].split(",")[0] == "j"
    assert len(lines) >= 4


def test_iterate_dump_writes_jets(tmp_path):
    dump = tmp_path / "jets.jsonl"
    res = run_cli("iterate", "--eps", "1e-3", "--jmax", "1", "--force",
                  "--dump", str(dump))
    assert res.returncode == 0, res.stderr
    rec = json.loads(dump.read_text().splitlines()[0])
    assert "k" in rec and "jet" in rec


def test_measure_sweep_csv():
    res = run_cli("measure", "--variant", "III", "--d", "2", "--tau", "1.5",
                  "--alpha", "0.005,0.01", "--format", "csv")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[1] == "alpha,bound"
    a = float(lines[2].split(",")[1])
    b = float(lines[3].split(",")[1])
    assert b == pytest.approx(2 * a, rel=1e-12)
