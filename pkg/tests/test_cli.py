import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from sdpd.cli import main
from sdpd.io import read_panel_csv, write_panel_csv
from sdpd.process_sim import random_model, simulate
from sdpd.spatial_weights import gen_spatial_matrix, write_weights_csv


@pytest.fixture
def sim_dir(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--w-kind", "W1", "--p", "8", "--T", "300", "--seed", "4", "--out", str(out)]) == 0
    return out


def test_simulate_outputs(sim_dir):
    y = read_panel_csv(sim_dir / "panel.csv")
    assert (y.T, y.p) == (300, 8)
    desc = json.loads((sim_dir / "model.json").read_text())
    assert len(desc["lambda0"]) == 8


def test_simulate_from_model_is_reproducible(sim_dir, tmp_path):
    out = tmp_path / "again"
    assert main(["simulate", "--model", str(sim_dir / "model.json"), "--T", "300", "--out", str(out)]) == 0
    assert (out / "panel.csv").read_text() == (sim_dir / "panel.csv").read_text()


def test_estimate_json_and_csv(sim_dir, tmp_path):
    args = ["estimate", "--panel", str(sim_dir / "panel.csv"), "--w", str(sim_dir / "W.csv")]
    assert main(args + ["--out", str(tmp_path / "j")]) == 0
    res = json.loads((tmp_path / "j" / "result.json").read_text())
    assert res["p"] == 8
    assert main(args + ["--out", str(tmp_path / "c"), "--format", "csv"]) == 0
    assert (tmp_path / "c" / "result.csv").exists()


def test_estimate_latent_w_p_over_t(tmp_path):
    W = gen_spatial_matrix("W1", 100, 0)
    write_panel_csv(simulate(random_model(W, 1), 50), tmp_path / "y.csv")
    assert main(["estimate", "--panel", str(tmp_path / "y.csv"), "--latent-w", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "W_hat.csv").exists()
    assert len(json.loads((tmp_path / "result.json").read_text())["lambda0_hat"]) == 100


def test_profile(sim_dir, tmp_path):
    rc = main(["profile", "--panel", str(sim_dir / "panel.csv"), "--w", str(sim_dir / "W.csv"),
               "--location", "2", "--grid=-2:2:41", "--out", str(tmp_path)])
    assert rc == 0
    with open(tmp_path / "profile.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert sum(r["point"] == "grid" for r in rows) == 41
    assert sum(r["point"] == "selected" for r in rows) == 1


def test_benchmark_var_not_computable(tmp_path, capsys):
    cfg = {"p": 20, "T": 15, "replications": 2, "estimators": ["var", "sdpd_known_w"]}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["benchmark", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path)]) == 0
    assert "NotComputable" in capsys.readouterr().out
    with open(tmp_path / "summary.csv") as fh:
        summ = {r["metric"]: r for r in csv.DictReader(fh)}
    assert summ["ase_A_var"]["note"] == "NotComputable"
    assert summ["ase_A_var"]["n_fail"] == "2"
    assert (tmp_path / "raw.csv").exists()


def test_benchmark_threads_flag(tmp_path):
    cfg = {"p": 8, "T": 100, "replications": 4}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    main(["benchmark", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "a")])
    main(["benchmark", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "b"), "--threads", "3"])
    assert (tmp_path / "a" / "raw.csv").read_text() == (tmp_path / "b" / "raw.csv").read_text()


def test_reduced_model_and_panel(sim_dir, tmp_path, capsys):
    assert main(["reduced", "--model", str(sim_dir / "model.json"), "--out", str(tmp_path / "t"), "--check"]) == 0
    assert "diagonalizable=True" in capsys.readouterr().out
    for method in ("known_w", "latent_w", "var"):
        rc = main(["reduced", "--panel", str(sim_dir / "panel.csv"), "--w", str(sim_dir / "W.csv"),
                   "--method", method, "--truth", str(tmp_path / "t" / "transition.csv"),
                   "--out", str(tmp_path / method)])
        assert rc == 0
        assert "ase_row1" in capsys.readouterr().out


class TestExitCodes:
    def test_usage_missing_subcommand(self):
        assert main([]) == 1

    def test_usage_bad_flag(self):
        assert main(["estimate", "--panel", "x.csv", "--w", "w.csv", "--bogus"]) == 1

    def test_usage_simulate_needs_source(self, tmp_path):
        assert main(["simulate", "--T", "10", "--out", str(tmp_path)]) == 1

    def test_usage_bad_grid(self, sim_dir, tmp_path):
        rc = main(["profile", "--panel", str(sim_dir / "panel.csv"), "--w", str(sim_dir / "W.csv"),
                   "--location", "1", "--grid", "oops", "--out", str(tmp_path)])
        assert rc == 1

    def test_data_missing_file(self, tmp_path):
        assert main(["estimate", "--panel", str(tmp_path / "nope.csv"), "--w", "w.csv"]) == 2

    def test_data_w_mismatch(self, sim_dir, tmp_path):
        write_weights_csv(gen_spatial_matrix("W1", 6, 0), tmp_path / "w6.csv")
        rc = main(["estimate", "--panel", str(sim_dir / "panel.csv"), "--w", str(tmp_path / "w6.csv"),
                   "--out", str(tmp_path)])
        assert rc == 2

    def test_data_bad_diagonal(self, sim_dir, tmp_path, capsys):
        np.savetxt(tmp_path / "w.csv", np.ones((8, 8)), delimiter=",")
        rc = main(["estimate", "--panel", str(sim_dir / "panel.csv"), "--w", str(tmp_path / "w.csv"),
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "diagonal" in capsys.readouterr().err

    def test_numeric_singular_filter(self, tmp_path):
        desc = {"W": {"entries": [[0.0, 1.0], [1.0, 0.0]]}, "lambda0": [1.0, 1.0], "lambda1": [0.1, 0.2],
                "error": {"sigma": [1.0, 1.0], "cross_mode": "independent"}}
        (tmp_path / "m.json").write_text(json.dumps(desc))
        assert main(["reduced", "--model", str(tmp_path / "m.json"), "--out", str(tmp_path)]) == 3


@pytest.mark.skipif(shutil.which("sdpd") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["sdpd", "simulate", "--w-kind", "W2", "--p", "6", "--T", "50",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "sdpd.cli"], capture_output=True, text=True)
    assert proc.returncode == 1
