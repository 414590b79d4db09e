import json

import numpy as np
import pytest

from spingraph.ensemble import (ConfigError, SWEEP_HEADER, cell_index,
                                config_from_dict, load_config, run_sweep,
                                write_summary_csv, write_sweep_csv)


def base_config(**over):
    doc = {
        "model": "xxz",
        "ensemble": {"kind": "er", "p": 0.5},
        "L_list": [6, 8],
        "param_name": "delta",
        "param_values": [0.5, 1.5],
        "n_draws": 3,
        "master_seed": 17,
    }
    doc.update(over)
    return doc


class TestConfig:
    def test_accepts_valid(self):
        cfg = config_from_dict(base_config())
        assert cfg.model == "xxz" and cfg.n_draws == 3

    def test_rejects_unknown_keys(self):
        with pytest.raises(ConfigError, match="unknown config"):
            config_from_dict(base_config(bogus=1))
        with pytest.raises(ConfigError, match="unknown ensemble"):
            config_from_dict(base_config(ensemble={"kind": "er", "p": 0.5,
                                                   "q": 2}))
        with pytest.raises(ConfigError, match="unknown solver"):
            config_from_dict(base_config(solver={"tolerance": 1e-8}))

    def test_rejects_missing_keys(self):
        doc = base_config()
        del doc["master_seed"]
        with pytest.raises(ConfigError, match="master_seed"):
            config_from_dict(doc)

    def test_rejects_wrong_param_name(self):
        with pytest.raises(ConfigError):
            config_from_dict(base_config(param_name="h"))

    def test_rejects_bad_ensemble(self):
        with pytest.raises(ConfigError):
            config_from_dict(base_config(ensemble={"kind": "er", "p": 2.0}))

    def test_memory_cap(self):
        doc = base_config(L_list=[24],
                          solver={"memory_cap_mb": 64})
        with pytest.raises(ConfigError, match="memory"):
            config_from_dict(doc)

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(str(path))


class TestCellIndex:
    def test_row_major_layout(self):
        # index(L_pos, value_pos, draw) with draws fastest
        assert cell_index(0, 0, 0, 4, 3) == 0
        assert cell_index(0, 0, 2, 4, 3) == 2
        assert cell_index(0, 1, 0, 4, 3) == 3
        assert cell_index(1, 0, 0, 4, 3) == 12

    def test_extending_values_keeps_prefix(self):
        # adding sweep points must not reshuffle existing rows within a
        # (L, value) block: indices depend only on positions before it
        a = cell_index(0, 1, 2, 2, 5)
        b = cell_index(0, 1, 2, 2, 5)
        assert a == b


class TestRunSweep:
    def test_complete_ensemble_zero_variance(self):
        cfg = config_from_dict(base_config(
            ensemble={"kind": "complete"}, L_list=[6],
            param_values=[0.5, 2.0], n_draws=3))
        rows, summary, n_failed = run_sweep(cfg)
        assert n_failed == 0
        for srow in summary:
            for col in ("var_energy_density", "var_c_afm", "var_c_xy"):
                assert srow[col] == pytest.approx(0.0, abs=1e-24)

    def test_summary_means_recomputable(self):
        cfg = config_from_dict(base_config(L_list=[6], n_draws=4))
        rows, summary, _ = run_sweep(cfg)
        for srow in summary:
            group = [r for r in rows if r["error"] is None
                     and r["L"] == srow["L"]
                     and r["param_value"] == srow["param_value"]]
            mean = np.mean([g["record"].c_xy for g in group])
            assert srow["mean_c_xy"] == pytest.approx(mean, abs=1e-12)

    def test_deterministic_and_parallel_identical(self, tmp_path):
        cfg = config_from_dict(base_config(L_list=[6], n_draws=4))
        out = []
        for threads in (1, 1, 2):
            rows, summary, _ = run_sweep(cfg, threads=threads)
            a = tmp_path / f"rows_{len(out)}.csv"
            b = tmp_path / f"sum_{len(out)}.csv"
            write_sweep_csv(rows, str(a))
            write_summary_csv(summary, str(b))
            out.append((a.read_bytes(), b.read_bytes()))
        assert out[0] == out[1] == out[2]

    def test_failures_recorded_not_fatal(self):
        # p small enough that some draws have no edges -> build fails
        cfg = config_from_dict(base_config(
            ensemble={"kind": "er", "p": 1e-6}, L_list=[6],
            param_values=[1.0], n_draws=8))
        rows, summary, n_failed = run_sweep(cfg)
        assert n_failed > 0
        assert summary[0]["n_failed"] == n_failed
        assert summary[0]["n_ok"] == 8 - n_failed
        failed = [r for r in rows if r["error"] is not None]
        assert all("edges" in r["error"] for r in failed)

    def test_header_exact(self, tmp_path):
        cfg = config_from_dict(base_config(L_list=[6], n_draws=1,
                                           param_values=[1.0]))
        rows, _, _ = run_sweep(cfg)
        path = tmp_path / "r.csv"
        write_sweep_csv(rows, str(path))
        first = path.read_text().splitlines()[0]
        assert first == SWEEP_HEADER
        assert first == ("ensemble,L,draw,seed,param_name,param_value,"
                         "energy_density,c_afm,c_xy,mz_density,mx_density,"
                         "ee_bits,shannon_zz,shannon_xx,shannon_yy,ground_M,"
                         "degenerate,n_edges,connected")

    def test_tfi_model(self):
        cfg = config_from_dict({
            "model": "tfi",
            "ensemble": {"kind": "antiregular"},
            "L_list": [6],
            "param_name": "h",
            "param_values": [0.5, 2.5],
            "n_draws": 1,
            "master_seed": 3,
        })
        rows, summary, n_failed = run_sweep(cfg)
        assert n_failed == 0
        low, high = rows[0]["record"], rows[1]["record"]
        # ferromagnet at weak field, paramagnet at strong field
        assert abs(low.mz_density) > 0.5
        assert abs(high.mz_density) < 0.4
        assert abs(high.mx_density) > 0.7
        assert low.ground_sector is None

    def test_xxz_rows_have_sector_and_flags(self):
        cfg = config_from_dict(base_config(L_list=[6], n_draws=2,
                                           param_values=[1.0]))
        rows, _, _ = run_sweep(cfg)
        for r in rows:
            rec = r["record"]
            assert rec.ground_sector is not None
            assert isinstance(rec.degenerate, bool)
            assert r["n_edges"] > 0
