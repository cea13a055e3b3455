import json
import os

import numpy as np
import pytest

from bflow import cli, harness, verify
from bflow.config import SolverConfig
from bflow.output import read_csv

SMALL = SolverConfig(N=32, dt=0.01, t_end=0.2, sample_every=5, u0_modes=((1, 0.0, 0.05),))


def write_config(path, cfg):
    path.write_text(cfg.to_text())
    return str(path)


class TestRunScenario:
    def test_constant_data_has_zero_cross_difference(self, tmp_path):
        cfg = SMALL.replace(u0_modes=(), u0_const=0.3)
        manifest = harness.run_scenario(cfg, "both", tmp_path)
        assert manifest.status == "completed" and manifest.exit_code == 0
        _, diff = read_csv(manifest.files["cross_difference"])
        assert np.all(diff[:, 1] == 0.0)
        for path in manifest.files.values():
            assert os.path.exists(path)

    def test_outputs_have_documented_columns(self, tmp_path):
        manifest = harness.run_scenario(SMALL, "both", tmp_path)
        header, data = read_csv(manifest.files["lagrangian_snapshots"])
        assert tuple(header) == harness.SNAPSHOT_HEADER
        assert data.shape == (5 * SMALL.N, 6)
        header, _ = read_csv(manifest.files["eulerian_diagnostics"])
        assert header == ["t", "cons_res", "h1", "mean_u", "min_slope", "decay_slope", "reg1_res"]
        header, slope = read_csv(manifest.files["eulerian_slope"])
        assert header == ["t", "min_slope"] and slope.shape[0] == SMALL.n_steps + 1
        _, diff = read_csv(manifest.files["cross_difference"])
        assert np.max(diff[:, 1]) < 1e-9
        doc = json.load(open(manifest.files["manifest"]))
        assert doc["config_hash"] == SMALL.content_hash() and doc["status"] == "completed"

    def test_deterministic_csv(self, tmp_path):
        a = harness.run_scenario(SMALL, "both", tmp_path / "a")
        b = harness.run_scenario(SMALL, "both", tmp_path / "b")
        for key in a.files:
            if key != "manifest":
                assert open(a.files[key], "rb").read() == open(b.files[key], "rb").read()

    def test_breaking_keeps_partial_outputs(self, tmp_path):
        cfg = SMALL.replace(t_end=1.0, u0_modes=((1, 0.0, 5.0),))
        manifest = harness.run_scenario(cfg, "lagrangian", tmp_path)
        assert manifest.status == "breaking-detected" and manifest.exit_code == 3
        _, slope = read_csv(manifest.files["lagrangian_slope"])
        assert np.all(np.diff(slope[:, 1]) < 0)

    def test_bad_mode(self, tmp_path):
        with pytest.raises(ValueError):
            harness.run_scenario(SMALL, "sideways", tmp_path)


class TestConvergence:
    def test_constant_data_is_exact(self):
        table = harness.convergence_study(SMALL.replace(u0_modes=(), u0_const=0.2), "dt", 3)
        assert table.exact and np.all(table.errors == 0.0)

    def test_temporal_order(self):
        cfg = SMALL.replace(N=32, dt=0.05, t_end=0.5, u0_modes=((1, 0.0, 0.2),))
        table = harness.convergence_study(cfg, "dt", 4)
        assert abs(table.fitted_order - 4.0) <= 0.2

    def test_spatial_convergence(self):
        cfg = SMALL.replace(N=16, dt=0.01, t_end=0.1, u0_modes=((1, 0.0, 0.05),))
        table = harness.convergence_study(cfg, "N", 4)
        assert table.errors[-2] < 1e-10
        assert [c.N for c in table.levels] == [16, 32, 64, 128]

    @pytest.mark.parametrize("kwargs", [{"axis": "time"}, {"levels": 2}, {"mode": "both"}])
    def test_bad_arguments(self, kwargs):
        args = {"axis": "dt", "levels": 3, "mode": "eulerian"} | kwargs
        with pytest.raises(ValueError):
            harness.convergence_study(SMALL, **args)


class TestCli:
    def test_run(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.cfg", SMALL)
        assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "out")]) == 0
        assert "status: completed" in capsys.readouterr().out
        assert (tmp_path / "out" / "cross_difference.csv").exists()

    def test_default_output_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BFLOW_OUT_DIR", str(tmp_path / "root"))
        cfg = write_config(tmp_path / "c.cfg", SMALL)
        assert cli.main(["run", "--config", cfg, "--mode", "eulerian"]) == 0
        runs = list((tmp_path / "root").iterdir())
        assert len(runs) == 1 and runs[0].name == f"run-{SMALL.content_hash()[:12]}"

    def test_invalid_config_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("N = 7\n")
        assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
        assert "error" in capsys.readouterr().err

    def test_breaking_exit_3(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", SMALL.replace(t_end=1.0, u0_modes=((1, 0.0, 5.0),)))
        assert cli.main(["run", "--config", cfg, "--mode", "lagrangian", "--out", str(tmp_path / "o")]) == 3
        assert (tmp_path / "o" / "lagrangian_slope.csv").exists()

    def test_blow_up_exit_4(self, tmp_path):
        # a guard below the data's own amplitude stands in for a genuine blow-up
        cfg = write_config(tmp_path / "c.cfg", SMALL.replace(max_amp=0.01, u0_modes=((1, 0.0, 0.05),)))
        assert cli.main(["run", "--config", cfg, "--mode", "eulerian", "--out", str(tmp_path / "o")]) == 4

    def test_convergence_writes_table_and_chart(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.cfg", SMALL.replace(u0_modes=(), u0_const=0.1))
        out = tmp_path / "conv"
        assert cli.main(["convergence", "--config", cfg, "--axis", "dt", "--levels", "3", "--out", str(out)]) == 0
        assert "exact" in capsys.readouterr().out
        assert (out / "convergence_dt.csv").exists() and (out / "convergence_dt.svg").exists()

    def test_plot(self, tmp_path):
        manifest = harness.run_scenario(SMALL, "eulerian", tmp_path)
        assert cli.main(["plot", manifest.files["eulerian_diagnostics"], "--kind", "timeseries"]) == 0
        assert (tmp_path / "eulerian_diagnostics.svg").exists()
        assert cli.main(["plot", manifest.files["eulerian_slope"], "--kind", "loglog"]) == 2

    def test_verify_oracles(self, tmp_path):
        assert cli.main(["verify", "--suite", "oracles", "--out", str(tmp_path)]) == 0
        report = json.load(open(tmp_path / "report_oracles.json"))
        assert report["failures"] == 0 and report["tests"] >= 1


def test_verify_reports_failures(monkeypatch):
    def failing():
        yield verify.CheckResult("always_fails", 1.0, 0.0, False)

    monkeypatch.setattr(verify, "_oracle_checks", failing)
    report = verify.run_suite("oracles")
    assert report["failures"] == 1
    assert "always_fails" in verify.summary(report)
