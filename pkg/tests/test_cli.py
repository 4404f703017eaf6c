import json
from pathlib import Path

import pytest

from spectra_lab.harness import cli, validate_metrics_csv
from spectra_lab.harness import experiments as ex
from spectra_lab.harness.metrics import ExperimentResult


@pytest.fixture
def audit_cfg(tmp_path):
    path = tmp_path / "audit.toml"
    path.write_text('experiment = "momentum_audit"\nseed = 4\nsteps = 1000\n')
    return path


def test_run_writes_csv_and_passes(audit_cfg, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", str(audit_cfg), "--out", str(out)]) == 0
    csv = out / "momentum_audit_seed4.csv"
    assert validate_metrics_csv(csv) == []
    side = json.loads(csv.with_suffix(".json").read_text())
    assert side["summary"]["passed"] is True
    assert "PASS  s_bound" in capsys.readouterr().out


def test_seed_override_and_env_out(audit_cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("SPECTRA_OUT", str(tmp_path / "env"))
    monkeypatch.setenv("SPECTRA_JOBS", "2")
    assert cli.main(["run", str(audit_cfg), "--seed", "11"]) == 0
    assert (tmp_path / "env" / "momentum_audit_seed11.csv").exists()


def test_bad_jobs_env_is_config_error(audit_cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("SPECTRA_JOBS", "many")
    assert cli.main(["run", str(audit_cfg), "--out", str(tmp_path)]) == 3
    assert cli.main(["run", str(audit_cfg), "--out", str(tmp_path), "--jobs", "0"]) == 3


def test_failed_check_exit_code(audit_cfg, tmp_path, monkeypatch, capsys):
    fake = lambda cfg, jobs=1: ExperimentResult("momentum_audit", [], {"s_bound": False})
    monkeypatch.setattr(cli, "run_experiment", fake)
    assert cli.main(["run", str(audit_cfg), "--out", str(tmp_path)]) == 2
    assert "FAIL  s_bound" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text('experiment = "momentum_audit"\nsed = 1\n')
    assert cli.main(["run", str(path)]) == 3
    err = capsys.readouterr().err
    assert "sed" in err and "line 2" in err


def test_validate_prints_resolved(audit_cfg, capsys):
    assert cli.main(["validate", str(audit_cfg)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["steps"] == 1000 and data["experiment"] == "momentum_audit"


def test_fstar_command(tmp_path, capsys):
    path = tmp_path / "fw.json"
    path.write_text(json.dumps({"experiment": "fw_weight_reg", "seed": 0, "d2_list": [1.0], "b_list": [1.0]}))
    assert cli.main(["fstar", str(path)]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 1 and rows[0]["value"] == pytest.approx(0.5457025890857833, abs=1e-9)
    assert cli.main(["fstar", str(tmp_path / "missing.json")]) == 3


def test_fstar_rejects_other_experiments(audit_cfg):
    assert cli.main(["fstar", str(audit_cfg)]) == 3


def test_wall_time_flag(audit_cfg, tmp_path):
    assert cli.main(["run", str(audit_cfg), "--out", str(tmp_path), "--wall-time"]) == 0
    header = (tmp_path / "momentum_audit_seed4.csv").read_text().splitlines()[0]
    assert "wall_time_s" in header


def test_runners_cover_every_experiment():
    from spectra_lab.harness.config import EXPERIMENTS

    assert set(ex.RUNNERS) == set(EXPERIMENTS)


@pytest.mark.parametrize("name", ["fw_weight_reg", "spike_robustness", "lemma_mc", "noise_analysis",
                                  "momentum_audit"])
def test_shipped_configs_validate(name, capsys):
    path = Path(__file__).parents[1] / "configs" / f"{name}.toml"
    assert cli.main(["validate", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["experiment"] == name
