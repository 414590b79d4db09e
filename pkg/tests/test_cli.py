import json

import numpy as np
import pytest

from spingraph.cli import main
from spingraph.graphs import read_graph_json
from spingraph.solvers import complete_xxz_spectrum


def run_cli(*argv):
    return main(list(argv))


class TestRun:
    def test_sweep_outputs(self, tmp_path):
        cfg = {"model": "xxz", "ensemble": {"kind": "er", "p": 0.5},
               "L_list": [6], "param_name": "delta", "param_values": [1.0],
               "n_draws": 2, "master_seed": 5}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "sweep"
        assert run_cli("run", "--config", str(cfg_path),
                       "--out", str(out)) == 0
        rows = (tmp_path / "sweep.csv").read_text().splitlines()
        assert len(rows) == 3  # header + 2 cells
        summary = (tmp_path / "sweep_summary.csv").read_text().splitlines()
        assert len(summary) == 2

    def test_bad_config_exits_1(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"model": "nope"}))
        assert run_cli("run", "--config", str(cfg_path),
                       "--out", str(tmp_path / "x")) == 1

    def test_missing_out_exits_1(self, tmp_path):
        cfg = {"model": "xxz", "ensemble": {"kind": "complete"},
               "L_list": [4], "param_name": "delta", "param_values": [1.0],
               "n_draws": 1, "master_seed": 5}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert run_cli("run", "--config", str(cfg_path)) == 1


class TestGenGraph:
    def test_roundtrip(self, tmp_path):
        out = tmp_path / "g.json"
        assert run_cli("gen-graph", "--kind", "er", "--L", "10",
                       "--p", "0.4", "--seed", "9", "--out", str(out)) == 0
        g = read_graph_json(str(out))
        assert g.L == 10

    def test_bad_kind_exits_1(self, tmp_path):
        assert run_cli("gen-graph", "--kind", "foo", "--L", "5",
                       "--out", str(tmp_path / "g.json")) == 1


class TestSpectrum:
    def test_dump_matches_library(self, tmp_path):
        out = tmp_path / "spec.csv"
        assert run_cli("spectrum", "--L", "6", "--delta", "1.5",
                       "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "S,M,lambda,degeneracy"
        entries = complete_xxz_spectrum(6, 1.0, 1.5)
        assert len(lines) == len(entries) + 1
        total = sum(int(line.rsplit(",", 1)[1]) for line in lines[1:])
        assert total == 64


class TestDensity:
    def test_masses_sum(self, tmp_path):
        out = tmp_path / "dens.csv"
        assert run_cli("density", "--L", "16", "--delta", "1.5",
                       "--bins", "32", "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "L,delta,bin_lo,bin_hi,mass"
        masses = [float(line.split(",")[4]) for line in lines[1:]]
        assert abs(sum(masses) - 1.0) < 1e-9


class TestCriticalPoint:
    def test_prints_value(self, capsys):
        assert run_cli("critical-point", "--lam", "0.5", "--p1", "0.5",
                       "--p2", "1") == 0
        assert capsys.readouterr().out.strip() == "3"


class TestCorrImage:
    def test_square_matrix(self, tmp_path):
        out = tmp_path / "corr.csv"
        assert run_cli("corr-image", "--kind", "complete", "--L", "6",
                       "--delta", "1.0", "--axis", "z",
                       "--out", str(out)) == 0
        rows = [line.split(",") for line in out.read_text().splitlines()]
        assert len(rows) == 6 and all(len(r) == 6 for r in rows)
        mat = np.array([[float(x) for x in r] for r in rows])
        assert np.allclose(np.diag(mat), 1.0)


class TestTheory:
    def test_lemma_quick(self, tmp_path):
        out = tmp_path / "lemma.json"
        assert run_cli("theory", "lemma-s1", "--trials", "10", "--dim", "32",
                       "--betas", "0.5,2", "--seed", "4",
                       "--out", str(out)) == 0
        doc = json.loads(out.read_text())
        assert doc["violations"] == 0

    def test_cuts_study_files(self, tmp_path):
        out = tmp_path / "cuts"
        assert run_cli("theory", "cuts", "--p", "0.5", "--L", "8,10",
                       "--draws", "2", "--seed", "3", "--out", str(out)) == 0
        csv_lines = (tmp_path / "cuts.csv").read_text().splitlines()
        assert csv_lines[0] == "study,L,draw,value"
        assert len(csv_lines) == 5
        doc = json.loads((tmp_path / "cuts.json").read_text())
        assert doc["seed"] is not None

    def test_diffmax_reproducible_bytes(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli("theory", "diffmax", "--p", "0.5", "--L", "6,8",
                           "--draws", "2", "--seed", "12",
                           "--out", str(out)) == 0
            blobs.append(((tmp_path / f"{name}.csv").read_bytes(),
                          (tmp_path / f"{name}.json").read_bytes()))
        assert blobs[0] == blobs[1]
