import csv
import json

import numpy as np
import pytest

from slide_ising.cli import main
from slide_ising.io import read_model, read_samples


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def pbsl_model(tmp_path):
    path = tmp_path / "truth.txt"
    assert run("generate", "--pbsl", 4, "--pattern", "ferro-one-weak", "--beta", 0.5, "--lambda", 0.3,
               "--seed", 1, "--out", path) == 0
    return path


class TestGenerate:
    def test_lattice_edge_count(self, pbsl_model):
        assert len(read_model(pbsl_model).edges()) == 32
        manifest = json.loads(pbsl_model.with_name("truth.txt.manifest.json").read_text())
        assert manifest["command"] == "generate" and manifest["seed"] == 1

    def test_odd_pd_is_usage_error(self, tmp_path, capsys):
        assert run("generate", "--rrg", 15, 3, "--beta", 0.5, "--out", tmp_path / "m.txt") == 2
        assert "error" in capsys.readouterr().err
        assert not (tmp_path / "m.txt").exists()

    def test_same_seed_same_bytes(self, tmp_path):
        for name in ("a.txt", "b.txt"):
            run("generate", "--rrg", 12, 3, "--beta", 0.5, "--lambda", 0.3, "--seed", 4, "--out", tmp_path / name)
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


class TestSample:
    def test_exact_moment(self, tmp_path):
        (tmp_path / "m.txt").write_text(f"p 2\n0 1 {np.log(2):.17g}\n")
        assert run("sample", tmp_path / "m.txt", "--n", 100_000, "--exact", "--seed", 3,
                   "--out", tmp_path / "s.txt") == 0
        assert read_samples(tmp_path / "s.txt").moments()[0, 1] == pytest.approx(0.6, abs=0.01)

    def test_zero_n_rejected(self, pbsl_model, tmp_path):
        assert run("sample", pbsl_model, "--n", 0, "--out", tmp_path / "s.txt") == 2

    def test_missing_model_file(self, tmp_path):
        assert run("sample", tmp_path / "nope.txt", "--n", 5, "--out", tmp_path / "s.txt") == 2


class TestPipeline:
    def test_round_trip_exact_recovery(self, pbsl_model, tmp_path, capsys):
        s, est = tmp_path / "s.txt", tmp_path / "est.txt"
        assert run("sample", pbsl_model, "--n", 8000, "--exact", "--seed", 2, "--out", s) == 0
        assert run("reconstruct", s, "--lambda", 0.3, "--dmax", 4, "--out", est) == 0
        capsys.readouterr()
        assert run("evaluate", est, pbsl_model, "--out", tmp_path / "metrics.json") == 0
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["exact_recovery"] and metrics["mcc"] == 1.0
        trace = json.loads((tmp_path / "est.txt.trace.json").read_text())
        assert len(trace["nodes"]) == 16

    def test_threads_same_bytes(self, pbsl_model, tmp_path):
        s = tmp_path / "s.txt"
        run("sample", pbsl_model, "--n", 2000, "--exact", "--seed", 5, "--out", s)
        for t in (1, 8):
            run("reconstruct", s, "--dmax", 4, "--threads", t, "--out", tmp_path / f"e{t}.txt")
        assert (tmp_path / "e1.txt").read_bytes() == (tmp_path / "e8.txt").read_bytes()

    def test_config_file_and_flag_precedence(self, pbsl_model, tmp_path):
        s = tmp_path / "s.txt"
        run("sample", pbsl_model, "--n", 500, "--exact", "--out", s)
        (tmp_path / "cfg.txt").write_text("d_max = 2\nlambda = 0.3  # known\ntau = 0.05\n")
        assert run("reconstruct", s, "--config", tmp_path / "cfg.txt", "--tau", 0.1, "--out", tmp_path / "e.txt") == 0
        params = json.loads((tmp_path / "e.txt.manifest.json").read_text())["params"]
        assert (params["d_max"], params["lambda"], params["tau_resolved"]) == (2, 0.3, 0.1)

    def test_bad_config_key(self, pbsl_model, tmp_path):
        (tmp_path / "cfg.txt").write_text("dmax = 2\n")
        assert run("reconstruct", pbsl_model, "--config", tmp_path / "cfg.txt", "--out", tmp_path / "e.txt") == 2

    def test_evaluate_dimension_mismatch(self, pbsl_model, tmp_path):
        (tmp_path / "small.txt").write_text("p 3\n0 1 0.5\n")
        assert run("evaluate", tmp_path / "small.txt", pbsl_model) == 2

    def test_evaluate_hand_case(self, tmp_path, capsys):
        # 6 nodes, 15 pairs: tp=3, fn=1, fp=1, tn=10
        (tmp_path / "t.txt").write_text("p 6\n0 1 1\n0 2 1\n0 3 1\n0 4 1\n")
        (tmp_path / "e.txt").write_text("p 6\n0 1 1\n0 2 1\n0 3 1\n4 5 1\n")
        run("evaluate", tmp_path / "e.txt", tmp_path / "t.txt")
        assert json.loads(capsys.readouterr().out)["mcc"] == pytest.approx(29 / 44, abs=1e-12)


class TestSweep:
    ARGS = ["sweep", "--axis", "degree", "--p", 8, "--degrees", 2, 3, 4, "--gamma", 3.0,
            "--lambda", 1.0, "--trials", 2, "--n-start", 100]

    def test_degree_rows_and_fit(self, tmp_path):
        assert run(*self.ARGS, "--out-dir", tmp_path) == 0
        with open(tmp_path / "cells.csv") as fh:
            cells = list(csv.DictReader(fh))
        assert [c["value"] for c in cells] == ["2", "3", "4"]
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert {"slope", "intercept", "r2"} <= set(summary["fit"])

    def test_resume_skips_done_cells(self, tmp_path, capsys):
        run(*self.ARGS, "--out-dir", tmp_path)
        first = (tmp_path / "cells.csv").read_bytes()
        capsys.readouterr()
        run(*self.ARGS, "--out-dir", tmp_path)
        assert "n_emp=" not in capsys.readouterr().out
        assert (tmp_path / "cells.csv").read_bytes() == first

    def test_exceeded_exit_code(self, tmp_path):
        code = run("sweep", "--axis", "beta", "--rrg", 8, 3, "--betas", 0.05, "--trials", 2,
                   "--n-start", 50, "--max-n", 60, "--out-dir", tmp_path)
        assert code == 3
        with open(tmp_path / "cells.csv") as fh:
            assert next(csv.DictReader(fh))["status"] == "max_n_exceeded"

    def test_degree_axis_needs_gamma(self, tmp_path):
        assert run("sweep", "--axis", "degree", "--p", 8, "--lambda", 0.3, "--out-dir", tmp_path) == 2


class TestVotesAndSpectral:
    def test_ingest(self, tmp_path):
        (tmp_path / "cfg.txt").write_text("token.Yea=+1\ntoken.Nay=-1\ntoken.?=missing\nmissing=-1\n")
        (tmp_path / "v.csv").write_text("Yea,Nay\nYea,Yea\n?,Nay\n")
        assert run("ingest-votes", tmp_path / "v.csv", "--config", tmp_path / "cfg.txt",
                   "--out", tmp_path / "s.txt") == 0
        assert read_samples(tmp_path / "s.txt").spins.tolist() == [[1, -1], [1, 1], [-1, -1]]

    def test_ingest_unknown_token(self, tmp_path, capsys):
        (tmp_path / "cfg.txt").write_text("token.Yea=+1\ntoken.Nay=-1\n")
        (tmp_path / "v.csv").write_text("Yea,Present\n")
        assert run("ingest-votes", tmp_path / "v.csv", "--config", tmp_path / "cfg.txt",
                   "--out", tmp_path / "s.txt") == 2
        assert "row 1, column 2" in capsys.readouterr().err

    def test_spectral_csv(self, tmp_path):
        (tmp_path / "m.txt").write_text("p 4\n0 1 1\n2 3 1\n")
        assert run("spectral", tmp_path / "m.txt", "--out", tmp_path / "xy.csv") == 0
        with open(tmp_path / "xy.csv") as fh:
            rows = list(csv.DictReader(fh))
        labels = [r["label"] for r in rows]
        assert labels[0] == labels[1] != labels[2] == labels[3]
