import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from subdiff.cli import (RunConfig, config_from_ini, config_to_ini,
                         load_config, main)
from subdiff.errors import ConfigError


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return header, data


def test_config_roundtrip_is_lossless():
    cfg = RunConfig(command="msd", family="tempered_stable", alpha=0.7,
                    lam=0.3, dtau=1e-4, fit_window=(0.05, 7.5),
                    mode="timeavg", seed=99).validate()
    text = config_to_ini(cfg)
    back = RunConfig(command="msd", **config_from_ini(text, "msd")).validate()
    assert back == cfg


def test_config_file_then_flag_precedence(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[common]\nfamily = gamma\nalpha = 0.3\nngrid = 11\n")
    cfg = load_config("simulate", file_path=str(path),
                      cli_overrides={"alpha": 0.9})
    assert cfg.family == "gamma"
    assert cfg.alpha == 0.9
    assert cfg.ngrid == 11


def test_config_validation_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(command="simulate", ngrid=1).validate()
    with pytest.raises(ConfigError):
        RunConfig(command="simulate", seed=-3).validate()
    with pytest.raises(ConfigError):
        RunConfig(command="msd", fit_window=(5.0, 1.0)).validate()
    with pytest.raises(ConfigError):
        RunConfig(command="figures", figure=7).validate()
    bad = tmp_path / "bad.ini"
    bad.write_text("[common]\nwibble = 3\n")
    with pytest.raises(ConfigError):
        load_config("simulate", file_path=str(bad))
    bad.write_text("[common]\nalpha = fast\n")
    with pytest.raises(ConfigError):
        load_config("simulate", file_path=str(bad))


def test_simulate_outputs_and_reproducibility(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    args = ["simulate", "--family", "stable", "--n", "3", "--ngrid", "4",
            "--tmax", "1", "--dtau", "0.01", "--seed", "7"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b), "--workers", "2"]) == 0
    for i in range(3):
        name = f"traj_{i:04d}.csv"
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    header, data = _read_csv(out_a / "traj_0000.csv")
    assert header == ["t", "S", "Y"]
    assert data[0, 0] == 0.0 and data[0, 2] == 0.0
    manifest = json.loads((out_a / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 7
    assert "workers" not in manifest["config"]
    assert manifest["trajectory_seeds"][2]["streams"] == [4, 5]
    assert sorted(manifest["outputs"]) == [f"traj_{i:04d}.csv" for i in range(3)]
    # the manifest config is sufficient to re-run the command
    echo = dict(manifest["config"])
    echo.pop("command")
    echo.pop("figure")
    rebuilt = RunConfig(command="simulate", **echo).validate()
    assert rebuilt.seed == 7


def test_simulate_minimal_grid(tmp_path):
    out = tmp_path / "mini"
    assert main(["simulate", "--family", "stable", "--n", "1", "--ngrid", "2",
                 "--tmax", "1", "--dtau", "0.01", "--out", str(out)]) == 0
    _, data = _read_csv(out / "traj_0000.csv")
    assert data.shape == (2, 3)
    assert data[0, 0] == 0.0 and data[0, 2] == 0.0


def test_simulate_gamma_shows_trapping_plateaus(tmp_path):
    out = tmp_path / "gam"
    assert main(["simulate", "--family", "gamma", "--n", "4", "--out",
                 str(out)]) == 0
    for i in range(4):
        _, data = _read_csv(out / f"traj_{i:04d}.csv")
        y = data[:, 2]
        assert np.any(np.diff(y) == 0.0)


def test_msd_analytic_mode_matches_closed_form(tmp_path):
    out = tmp_path / "an"
    assert main(["msd", "--family", "stable", "--alpha", "0.6", "--mode",
                 "analytic", "--ngrid", "9", "--tmax", "10",
                 "--out", str(out)]) == 0
    header, data = _read_csv(out / "msd_analytic.csv")
    assert header == ["t", "msd"]
    for t, v in data:
        expected = 0.0 if t == 0.0 else t ** 0.6 / math.gamma(1.6)
        assert v == pytest.approx(expected, rel=1e-12)


def test_msd_ensemble_mode_with_fit(tmp_path):
    out = tmp_path / "en"
    assert main(["msd", "--family", "stable", "--n", "200", "--ngrid", "12",
                 "--tmax", "2", "--dtau", "0.001", "--seed", "5",
                 "--fit-window", "0.1:2", "--out", str(out)]) == 0
    header, data = _read_csv(out / "msd_ensemble.csv")
    assert header == ["t", "msd", "stderr"]
    assert np.all(data[1:, 2] > 0.0)
    fit = json.loads((out / "msd_fit.json").read_text())
    assert 0.4 < fit["exponent"] < 0.8
    assert fit["window"] == [0.1, 2.0]


def test_msd_timeavg_mode_with_fit(tmp_path):
    out = tmp_path / "ta"
    assert main(["msd", "--family", "gamma", "--mode", "timeavg",
                 "--ngrid", "201", "--tmax", "20", "--dtau", "0.01",
                 "--fit-window", "0.2:2", "--out", str(out)]) == 0
    header, data = _read_csv(out / "msd_timeavg.csv")
    assert header == ["lag", "msd"]
    assert np.all(np.diff(data[:, 0]) > 0.0)
    fit = json.loads((out / "msd_fit.json").read_text())
    assert 0.7 < fit["exponent"] < 1.4


def test_kernel_table_schema_and_limits(tmp_path):
    out = tmp_path / "ker"
    assert main(["kernel", "--family", "tempered_stable", "--tmax", "200",
                 "--ngrid", "6", "--out", str(out)]) == 0
    header, data = _read_csv(out / "kernel.csv")
    assert header == ["t", "kernel", "z", "psi", "limit", "near_limit"]
    assert np.allclose(data[:, 4], 5.0 / 3.0)
    assert data[-1, 5] == 1.0 and data[0, 5] == 0.0
    out2 = tmp_path / "ker2"
    assert main(["kernel", "--family", "stable", "--alpha", "0.5",
                 "--tmax", "1", "--ngrid", "2", "--out", str(out2)]) == 0
    _, data = _read_csv(out2 / "kernel.csv")
    assert data[-1, 0] == 1.0
    assert data[-1, 1] == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-10)


def test_kernel_gamma_small_time_behavior(tmp_path):
    # the kernel level itself grows as t -> 0; t * kernel shrinks to 0
    out = tmp_path / "kg"
    assert main(["kernel", "--family", "gamma", "--tmax", "1",
                 "--ngrid", "4", "--out", str(out)]) == 0
    _, data = _read_csv(out / "kernel.csv")
    t, m = data[:, 0], data[:, 1]
    assert np.all(np.isfinite(m)) and np.all(m > 0.0)
    tm = t * m
    assert tm[0] < tm[1] < tm[2]
    assert m[0] > m[1] > m[2]


def test_figures_1_pdf_and_tail_bundles(tmp_path):
    out = tmp_path / "f1"
    assert main(["figures", "1", "--out", str(out)]) == 0
    for fam in ("stable", "tempered_stable", "gamma"):
        assert (out / f"fig1_pdf_{fam}.csv").exists()
        assert (out / f"fig1_tail_{fam}.csv").exists()
    _, tail = _read_csv(out / "fig1_tail_stable.csv")
    slope, _ = np.polyfit(np.log(tail[:, 0]), np.log(tail[:, 1]), 1)
    assert slope == pytest.approx(-1.6, abs=0.05)
    for fam in ("tempered_stable", "gamma"):
        _, tail = _read_csv(out / f"fig1_tail_{fam}.csv")
        local = np.diff(np.log(tail[:, 1])) / np.diff(np.log(tail[:, 0]))
        assert np.all(np.diff(local) < 0.0)


def test_figures_2_trajectories(tmp_path):
    out = tmp_path / "f2"
    assert main(["figures", "2", "--ngrid", "101", "--dtau", "0.001",
                 "--out", str(out)]) == 0
    names = [f"fig2_{fam}_traj_{k}.csv"
             for fam in ("stable", "tempered_stable", "gamma")
             for k in range(3)]
    for name in names:
        assert (out / name).exists()
    _, data = _read_csv(out / "fig2_gamma_traj_0.csv")
    assert np.any(np.diff(data[:, 2]) == 0.0)


def test_figures_3_campaign_files_and_fit_keys(tmp_path):
    out = tmp_path / "f3"
    assert main(["figures", "3", "--n", "8", "--seed", "4", "--out",
                 str(out)]) == 0
    fits = json.loads((out / "fig3_fits.json").read_text())
    assert set(fits) == {"stable", "ts_small", "ts_large", "gamma"}
    for name in fits:
        assert (out / f"fig3_msd_{name}.csv").exists()
        assert fits[name]["n_trajectories"] == 8


def test_figures_4_time_average_bundles(tmp_path):
    out = tmp_path / "f4"
    assert main(["figures", "4", "--tmax", "20", "--ngrid", "401",
                 "--dtau", "0.01", "--out", str(out)]) == 0
    for fam in ("stable", "tempered_stable", "gamma"):
        _, data = _read_csv(out / f"fig4_tamsd_{fam}.csv")
        assert np.all(np.diff(data[:, 0]) > 0.0)
    assert (out / "fig4_fits.json").exists()


def test_output_dir_env_var(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("SUBDIFF_OUT", str(target))
    assert main(["kernel", "--family", "stable", "--tmax", "1",
                 "--ngrid", "2"]) == 0
    assert (target / "kernel.csv").exists()


def test_cli_reports_config_errors(capsys):
    rc = main(["simulate", "--alpha", "-3", "--n", "1"])
    assert rc == 2
    assert "alpha" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "subdiff.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.1.0"
