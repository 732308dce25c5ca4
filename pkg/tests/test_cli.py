import subprocess
import sys

import pytest

from pvqc import cli

SMOKE = "[sweep]\nvariants = VQC, FWP_Both\nepochs = 2\nn_qubits = 2\nn_train = 40\nn_test = 20\nseeds = 0, 1\n[task:moons]\nnoise = 0.1\n"


@pytest.fixture
def smoke_config(tmp_path):
    path = tmp_path / "smoke.ini"
    path.write_text(SMOKE)
    return path


def test_dry_run_lists_configs(smoke_config, tmp_path, capsys):
    assert cli.main(["run", "--config", str(smoke_config), "--dry-run", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "moons-noise0.1_VQC:" in out and "moons-noise0.1_FWP_Both:" in out
    assert "2 configurations" in out
    assert not (tmp_path / "o").exists()


def test_run_then_rerun_identical(smoke_config, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(smoke_config), "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert "moons-noise0.1" in table and "FWP_Both" in table and "+-" in table
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert len(first) == 6
    assert cli.main(["run", "--config", str(smoke_config), "--out", str(out), "--parallel", "2"]) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first


def test_env_fallback(smoke_config, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envdir"))
    assert cli.main(["run", "--config", str(smoke_config)]) == 0
    assert (tmp_path / "envdir" / "summary_moons-noise0.1_VQC.csv").exists()


def test_empty_sweep(tmp_path, capsys):
    cfg = tmp_path / "empty.ini"
    cfg.write_text("[sweep]\nepochs = 3\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert not (tmp_path / "o").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[task:moons]\nnoise = 0.1\nvariants = Magic\n")
    assert cli.main(["run", "--config", str(cfg)]) == 2
    assert "FWP_Both" in capsys.readouterr().err


def test_plot_command(smoke_config, tmp_path):
    out = tmp_path / "out"
    cli.main(["run", "--config", str(smoke_config), "--out", str(out)])
    summaries = sorted(str(p) for p in out.glob("summary_*.csv"))
    svg = tmp_path / "curves.svg"
    assert cli.main(["plot", "--summary", *summaries, "--out", str(svg)]) == 0
    assert svg.read_text().startswith("<svg")


def test_plot_bad_csv(tmp_path, capsys):
    bad = tmp_path / "s.csv"
    bad.write_text("variant,task,epoch,loss_mean,loss_std,acc_mean,acc_std\nVQC,t,1,x,0,0,0\n")
    assert cli.main(["plot", "--summary", str(bad), "--out", str(tmp_path / "a.svg")]) == 2
    assert "row 2" in capsys.readouterr().err


def test_selftest_command(capsys):
    assert cli.main(["selftest"]) == 0
    assert capsys.readouterr().out.count("PASS") == 6


def test_console_entry_point():
    result = subprocess.run([sys.executable, "-m", "pvqc.cli", "--help"], capture_output=True, text=True)
    assert result.returncode == 0 and "selftest" in result.stdout
