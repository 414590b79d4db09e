"""Sweep harness: (ensemble, L, coupling, draw) grids to CSV.

Each cell derives its seed as mix(master ^ index) with
index = (L_pos * n_values + value_pos) * n_draws + draw, so extending a
sweep never reshuffles existing cells.  Rows are collected and written in
canonical order, which makes parallel and serial runs byte-identical.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graphs import EnsembleSpec, GraphError, site_ordering
from .graphs import generate as generate_graph
from .hamiltonian import CouplingParams, build, preset_tfi, preset_xxz
from .observables import (DEFAULT_BINS, ObservablesRecord, corr_matrix,
                          ensemble_stats, entanglement_entropy, magnetization,
                          shannon_entropy)
from .seeding import Seed
from .solvers import lanczos_ground

SWEEP_HEADER = ("ensemble,L,draw,seed,param_name,param_value,energy_density,"
                "c_afm,c_xy,mz_density,mx_density,ee_bits,shannon_zz,"
                "shannon_xx,shannon_yy,ground_M,degenerate,n_edges,connected")

OBSERVABLE_COLUMNS = ("energy_density", "c_afm", "c_xy", "mz_density",
                      "mx_density", "ee_bits", "shannon_zz", "shannon_xx",
                      "shannon_yy")


class ConfigError(ValueError):
    pass


@dataclass
class SolverSettings:
    method: str = "auto"          # auto | dense | lanczos
    tol: float = 1e-10
    max_iter: int = 600
    dim_cap: int = 1 << 26
    memory_cap_mb: int = 4096


@dataclass
class ExperimentConfig:
    model: str                    # xxz | tfi
    ensemble: EnsembleSpec
    L_list: list[int]
    param_name: str               # delta | h
    param_values: list[float]
    n_draws: int
    master_seed: int
    solver: SolverSettings = field(default_factory=SolverSettings)
    n_bins: int = DEFAULT_BINS
    ordering: str = "auto"
    tfi_break_symmetry: bool = True
    out: str | None = None

    def validate(self) -> None:
        if self.model not in ("xxz", "tfi"):
            raise ConfigError(f"unknown model {self.model!r}")
        want = "delta" if self.model == "xxz" else "h"
        if self.param_name != want:
            raise ConfigError(
                f"model {self.model} sweeps {want!r}, not {self.param_name!r}")
        if not self.L_list or any(L < 2 for L in self.L_list):
            raise ConfigError("L_list must contain sizes >= 2")
        if not self.param_values:
            raise ConfigError("empty parameter grid")
        if self.n_draws < 1:
            raise ConfigError("n_draws must be >= 1")
        if self.ordering not in ("auto", "identity", "cut_blocks",
                                 "irregular_center"):
            raise ConfigError(f"unknown ordering {self.ordering!r}")
        for L in self.L_list:
            dim = 1 << L
            if dim > self.solver.dim_cap:
                raise ConfigError(f"L={L} exceeds dimension cap")
            # coarse peak-memory estimate: Lanczos basis plus workspace
            est_mb = dim * 8 * min(dim, self.solver.max_iter + 8) / 2 ** 20
            if self.model == "xxz":
                est_mb /= 4  # largest sector is well below 2^L
            if est_mb > self.solver.memory_cap_mb:
                raise ConfigError(
                    f"L={L} estimated memory {est_mb:.0f} MiB exceeds cap "
                    f"{self.solver.memory_cap_mb} MiB")


_CONFIG_KEYS = {"model", "ensemble", "L_list", "param_name", "param_values",
                "n_draws", "master_seed", "solver", "n_bins", "ordering",
                "tfi_break_symmetry", "out"}
_ENSEMBLE_KEYS = {"kind", "p", "lambda", "p1", "p2", "deg_lo", "deg_hi"}
_SOLVER_KEYS = {"method", "tol", "max_iter", "dim_cap", "memory_cap_mb"}


def config_from_dict(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("model", "ensemble", "L_list", "param_name", "param_values",
                "n_draws", "master_seed"):
        if key not in doc:
            raise ConfigError(f"missing config key {key!r}")
    ens = dict(doc["ensemble"])
    unknown = set(ens) - _ENSEMBLE_KEYS
    if unknown:
        raise ConfigError(f"unknown ensemble keys: {sorted(unknown)}")
    try:
        spec = EnsembleSpec(kind=ens.get("kind", ""), p=ens.get("p"),
                            lam=ens.get("lambda"), p1=ens.get("p1"),
                            p2=ens.get("p2"), deg_lo=ens.get("deg_lo"),
                            deg_hi=ens.get("deg_hi"))
    except GraphError as exc:
        raise ConfigError(str(exc)) from exc
    solver = SolverSettings()
    if "solver" in doc:
        sv = dict(doc["solver"])
        unknown = set(sv) - _SOLVER_KEYS
        if unknown:
            raise ConfigError(f"unknown solver keys: {sorted(unknown)}")
        for key, val in sv.items():
            setattr(solver, key, val)
    cfg = ExperimentConfig(
        model=doc["model"], ensemble=spec,
        L_list=[int(x) for x in doc["L_list"]],
        param_name=doc["param_name"],
        param_values=[float(x) for x in doc["param_values"]],
        n_draws=int(doc["n_draws"]), master_seed=int(doc["master_seed"]),
        solver=solver, n_bins=int(doc.get("n_bins", DEFAULT_BINS)),
        ordering=doc.get("ordering", "auto"),
        tfi_break_symmetry=bool(doc.get("tfi_break_symmetry", True)),
        out=doc.get("out"))
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


# ---------------------------------------------------------------------------
# cells


def cell_index(l_pos: int, value_pos: int, draw: int, n_values: int,
               n_draws: int) -> int:
    return (l_pos * n_values + value_pos) * n_draws + draw


def _pick_ordering(cfg: ExperimentConfig, g) -> np.ndarray:
    kind = cfg.ordering
    if kind == "auto":
        if cfg.ensemble.kind == "cut":
            kind = "cut_blocks"
        elif cfg.ensemble.kind in ("uniform_degree", "antiregular"):
            kind = "irregular_center"
        else:
            kind = "identity"
    return site_ordering(g, kind)


def run_cell(cfg: ExperimentConfig, l_pos: int, value_pos: int,
             draw: int) -> dict:
    """Solve one (L, sweep value, draw) cell and return its row dict."""
    L = cfg.L_list[l_pos]
    value = cfg.param_values[value_pos]
    idx = cell_index(l_pos, value_pos, draw, len(cfg.param_values),
                     cfg.n_draws)
    cell_seed = Seed(cfg.master_seed, idx)
    g = generate_graph(cfg.ensemble, L, cell_seed)
    if cfg.model == "xxz":
        params = preset_xxz(1.0, value)
    else:
        params = preset_tfi(value, cfg.tfi_break_symmetry)
    op = build(g, params, dim_cap=cfg.solver.dim_cap)
    solver_seed = cell_seed.at(idx + 2 ** 32)
    result = lanczos_ground(op, tol=cfg.solver.tol,
                            max_iter=cfg.solver.max_iter, seed=solver_seed,
                            method=cfg.solver.method)
    state = result.state
    ordering = _pick_ordering(cfg, g)
    zz = corr_matrix(state, "z")
    xx = corr_matrix(state, "x")
    yy = corr_matrix(state, "y")
    c_afm = float(sum(zz.values[u, v] for (u, v) in g.edges)) / g.n_edges
    iu = np.triu_indices(L, k=1)
    c_xy = float((xx.values[iu] + yy.values[iu]).sum()) / g.n_edges
    rec = ObservablesRecord(
        energy_density=result.energy / L,
        c_afm=c_afm, c_xy=c_xy,
        mz_density=magnetization(state, "z"),
        mx_density=magnetization(state, "x"),
        ee_bits=entanglement_entropy(state, L // 2, ordering),
        shannon_zz=shannon_entropy(zz, cfg.n_bins),
        shannon_xx=shannon_entropy(xx, cfg.n_bins),
        shannon_yy=shannon_entropy(yy, cfg.n_bins),
        ground_sector=result.sector,
        degenerate=result.degenerate)
    return {
        "ensemble": cfg.ensemble.label(), "L": L, "draw": draw,
        "seed": cell_seed.value, "param_name": cfg.param_name,
        "param_value": value, "record": rec, "n_edges": g.n_edges,
        "connected": g.is_connected(), "l_pos": l_pos,
        "value_pos": value_pos, "error": None,
    }


def _run_cell_safe(args):
    cfg_doc, l_pos, value_pos, draw = args
    cfg = config_from_dict(cfg_doc)
    try:
        return run_cell(cfg, l_pos, value_pos, draw)
    except Exception as exc:  # cell failures must not sink the sweep
        L = cfg.L_list[l_pos]
        value = cfg.param_values[value_pos]
        idx = cell_index(l_pos, value_pos, draw, len(cfg.param_values),
                         cfg.n_draws)
        return {"ensemble": cfg.ensemble.label(), "L": L, "draw": draw,
                "seed": Seed(cfg.master_seed, idx).value,
                "param_name": cfg.param_name, "param_value": value,
                "record": None, "n_edges": 0, "connected": False,
                "l_pos": l_pos, "value_pos": value_pos,
                "error": f"{type(exc).__name__}: {exc}"}


def _config_to_dict(cfg: ExperimentConfig) -> dict:
    ens: dict = {"kind": cfg.ensemble.kind}
    for key, attr in (("p", "p"), ("lambda", "lam"), ("p1", "p1"),
                      ("p2", "p2"), ("deg_lo", "deg_lo"),
                      ("deg_hi", "deg_hi")):
        val = getattr(cfg.ensemble, attr)
        if val is not None:
            ens[key] = val
    return {"model": cfg.model, "ensemble": ens, "L_list": cfg.L_list,
            "param_name": cfg.param_name, "param_values": cfg.param_values,
            "n_draws": cfg.n_draws, "master_seed": cfg.master_seed,
            "solver": {"method": cfg.solver.method, "tol": cfg.solver.tol,
                       "max_iter": cfg.solver.max_iter,
                       "dim_cap": cfg.solver.dim_cap,
                       "memory_cap_mb": cfg.solver.memory_cap_mb},
            "n_bins": cfg.n_bins, "ordering": cfg.ordering,
            "tfi_break_symmetry": cfg.tfi_break_symmetry}


# ---------------------------------------------------------------------------
# sweep driver


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return f"{x:.12g}"


def run_sweep(cfg: ExperimentConfig, threads: int = 1):
    """Execute the sweep; returns (rows, summary_rows, n_failed).

    Rows come back in canonical (L, value, draw) order regardless of the
    execution schedule.
    """
    cfg.validate()
    cells = [(l_pos, v_pos, draw)
             for l_pos in range(len(cfg.L_list))
             for v_pos in range(len(cfg.param_values))
             for draw in range(cfg.n_draws)]
    cfg_doc = _config_to_dict(cfg)
    tasks = [(cfg_doc, *cell) for cell in cells]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_cell_safe, tasks, chunksize=1))
    else:
        results = [_run_cell_safe(t) for t in tasks]
    results.sort(key=lambda r: (r["l_pos"], r["value_pos"], r["draw"]))

    summary_rows = []
    for l_pos in range(len(cfg.L_list)):
        for v_pos in range(len(cfg.param_values)):
            group = [r for r in results
                     if r["l_pos"] == l_pos and r["value_pos"] == v_pos]
            ok = [r for r in group if r["error"] is None]
            row: dict = {"ensemble": cfg.ensemble.label(),
                         "L": cfg.L_list[l_pos],
                         "param_value": cfg.param_values[v_pos],
                         "n_ok": len(ok), "n_failed": len(group) - len(ok)}
            for col in OBSERVABLE_COLUMNS:
                vals = [getattr(r["record"], col) for r in ok]
                if vals:
                    st = ensemble_stats(vals)
                    row[f"mean_{col}"] = st.mean
                    row[f"var_{col}"] = st.variance
                else:
                    row[f"mean_{col}"] = None
                    row[f"var_{col}"] = None
            summary_rows.append(row)
    n_failed = sum(1 for r in results if r["error"] is not None)
    return results, summary_rows, n_failed


def write_sweep_csv(rows, path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for r in rows:
            if r["error"] is not None:
                continue
            rec = r["record"]
            fields = [r["ensemble"], _fmt(r["L"]), _fmt(r["draw"]),
                      _fmt(r["seed"]), r["param_name"],
                      _fmt(r["param_value"]),
                      _fmt(rec.energy_density), _fmt(rec.c_afm),
                      _fmt(rec.c_xy), _fmt(rec.mz_density),
                      _fmt(rec.mx_density), _fmt(rec.ee_bits),
                      _fmt(rec.shannon_zz), _fmt(rec.shannon_xx),
                      _fmt(rec.shannon_yy), _fmt(rec.ground_sector),
                      _fmt(rec.degenerate), _fmt(r["n_edges"]),
                      _fmt(r["connected"])]
            fh.write(",".join(fields) + "\n")
    os.replace(tmp, path)


def write_summary_csv(summary_rows, path: str) -> None:
    cols = ["ensemble", "L", "param_value", "n_ok", "n_failed"]
    for col in OBSERVABLE_COLUMNS:
        cols.append(f"mean_{col}")
        cols.append(f"var_{col}")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in summary_rows:
            fh.write(",".join(_fmt(row[c]) if not isinstance(row[c], str)
                              else row[c] for c in cols) + "\n")
    os.replace(tmp, path)
