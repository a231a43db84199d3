import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from qlgawalk.cli import main
from qlgawalk.correspondence import check_equivalence, embedding_for
from qlgawalk.walks import build_standard, symmetric_initial

ROOT = Path(__file__).resolve().parents[1]
PI4 = float(np.pi / 4)


@pytest.fixture(autouse=True)
def _no_env_override(monkeypatch):
    monkeypatch.delenv("QLGAWALK_OUTPUT_DIR", raising=False)


def write_config(tmp_path, raw, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return path


def minimal(tmp_path, **extra):
    return {"model": {"kind": "standard", "theta": PI4}, "t_max": 10,
            "outputs": ["distribution_per_step"], "output_dir": str(tmp_path / "out"), **extra}


def test_run_minimal(tmp_path):
    assert main(["run", str(write_config(tmp_path, minimal(tmp_path)))]) == 0
    out = tmp_path / "out"
    csvs = sorted(p.name for p in out.glob("distribution_t*.csv"))
    assert csvs == [f"distribution_t{t:04d}.csv" for t in range(1, 11)]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["t_max"] == 10
    assert float(summary["max_norm_drift"]) < 1e-12
    rows = np.loadtxt(out / "distribution_t0002.csv", delimiter=",", skiprows=1)
    assert np.allclose(rows, [[-2, 0.25], [0, 0.5], [2, 0.25]], atol=1e-15)


def test_wrong_theta_list_exits_1(tmp_path, capsys):
    raw = {"model": {"kind": "particle_history", "N": 3, "variant": "cycled",
                     "thetas": [0.1, 0.2]}, "output_dir": str(tmp_path)}
    assert main(["run", str(write_config(tmp_path, raw))]) == 1
    assert "model.thetas" in capsys.readouterr().err


def test_equivalence_report_matches_library(tmp_path):
    raw = minimal(tmp_path, representation="both", tolerance=1e-10, t_max=12,
                  initial_state={"kind": "symmetric"},
                  outputs=["equivalence_report", "spread_series"])
    assert main(["run", str(write_config(tmp_path, raw))]) == 0
    text = (tmp_path / "out" / "equivalence_report.csv").read_text()
    assert text.splitlines()[0] == "t,max_deviation,sector_leakage"
    model = build_standard(PI4)
    expect = check_equivalence(model, embedding_for(model), symmetric_initial(), 12, 1e-10)
    assert text == expect.to_csv()
    assert (tmp_path / "out" / "spread_series.csv").exists()


def test_qlga_representation_matches_walk(tmp_path):
    a = minimal(tmp_path, output_dir=str(tmp_path / "a"))
    b = minimal(tmp_path, output_dir=str(tmp_path / "b"), representation="qlga")
    assert main(["run", str(write_config(tmp_path, a, "a.yaml"))]) == 0
    assert main(["run", str(write_config(tmp_path, b, "b.yaml"))]) == 0
    for t in (1, 5, 10):
        pa = np.loadtxt(tmp_path / "a" / f"distribution_t{t:04d}.csv", delimiter=",", skiprows=1)
        pb = np.loadtxt(tmp_path / "b" / f"distribution_t{t:04d}.csv", delimiter=",", skiprows=1)
        assert np.allclose(pa, pb, atol=1e-14)


def test_mcgettrick_qlga_is_config_error(tmp_path, capsys):
    raw = {"model": {"kind": "mcgettrick", "theta": 0.3}, "representation": "qlga",
           "output_dir": str(tmp_path)}
    assert main(["run", str(write_config(tmp_path, raw))]) == 1
    assert "representation" in capsys.readouterr().err


def test_equivalence_failure_exits_2(tmp_path):
    # the two engines differ at the rounding level, so a zero tolerance must fail
    raw = minimal(tmp_path, representation="both", tolerance=0.0, t_max=5,
                  outputs=["equivalence_report"], initial_state={"kind": "symmetric"})
    assert main(["run", str(write_config(tmp_path, raw))]) == 2
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["passed"] is False


def test_missing_config_exits_3(tmp_path):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 3


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    raw = minimal(tmp_path, output_dir=str(blocker / "sub"))
    assert main(["run", str(write_config(tmp_path, raw))]) == 3


def test_env_overrides_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("QLGAWALK_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run", str(write_config(tmp_path, minimal(tmp_path)))]) == 0
    assert (tmp_path / "env" / "summary.json").exists()
    assert not (tmp_path / "out").exists()


def test_rerun_is_byte_identical(tmp_path):
    raw = minimal(tmp_path, representation="both", outputs=[
        "distribution_per_step", "spread_series", "equivalence_report"],
        initial_state={"kind": "random"}, seed=9)
    path = write_config(tmp_path, raw)
    assert main(["run", str(path)]) == 0
    first = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
    assert main(["run", str(path)]) == 0
    second = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
    assert first == second


def test_oracle_subcommand(tmp_path):
    raw = {"model": {"kind": "particle_history", "N": 2, "theta": PI4, "period": 8},
           "t_max": 6, "output_dir": str(tmp_path)}
    assert main(["oracle", str(write_config(tmp_path, raw))]) == 0
    summary = json.loads((tmp_path / "oracle_summary.json").read_text())
    assert float(summary["max_deviation"]) < 1e-12
    # unbounded line walks use a ring window
    raw["model"].pop("period")
    assert main(["oracle", str(write_config(tmp_path, raw))]) == 0
    assert "window" in json.loads((tmp_path / "oracle_summary.json").read_text())["mode"]


def test_oracle_needs_torus_for_2d(tmp_path):
    raw = {"model": {"kind": "two_d"}, "output_dir": str(tmp_path)}
    assert main(["oracle", str(write_config(tmp_path, raw))]) == 1


def test_verify_unitarity(capsys):
    assert main(["verify", "unitarity"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_verify_oracle():
    assert main(["verify", "oracle"]) == 0


def test_usage_error_exits_1():
    with pytest.raises(SystemExit) as info:
        main(["verify", "everything"])
    assert info.value.code == 1


@pytest.mark.parametrize("path", sorted((ROOT / "configs").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_run(path, tmp_path, monkeypatch):
    monkeypatch.setenv("QLGAWALK_OUTPUT_DIR", str(tmp_path))
    assert main(["run", str(path)]) == 0


def test_module_entry_point(tmp_path):
    env = {**os.environ, "QLGAWALK_OUTPUT_DIR": str(tmp_path)}
    cfg = write_config(tmp_path, minimal(tmp_path))
    proc = subprocess.run([sys.executable, "-m", "qlgawalk", "run", str(cfg)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
