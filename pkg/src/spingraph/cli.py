"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.  All
output files are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .ensemble import (ConfigError, load_config, run_sweep, write_sweep_csv,
                       write_summary_csv)
from .graphs import (EnsembleSpec, GraphError, generate, site_ordering,
                     write_graph_json)
from .hamiltonian import HamiltonianError, build, preset_tfi, preset_xxz
from .observables import corr_matrix
from .seeding import Seed
from .solvers import (SolverError, complete_xxz_spectrum, critical_point,
                      lanczos_ground, spectral_density)
from .theorybench import (cut_concentration, diffmax_scaling,
                          free_energy_convergence, lemma_s1_check,
                          theorem_s2_check)

CONFIG_ERRORS = (ConfigError, GraphError, HamiltonianError, ValueError)


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ensemble_from_args(args) -> EnsembleSpec:
    return EnsembleSpec(kind=args.kind, p=args.p, lam=args.lam, p1=args.p1,
                        p2=args.p2, deg_lo=args.deg_lo, deg_hi=args.deg_hi)


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--out", type=str, default=None, help="output path")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spingraph",
        description="Spin Hamiltonians on graphs: sweeps, spectra, studies")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a sweep config")
    run.add_argument("--config", required=True)
    _add_common(run)

    gg = sub.add_parser("gen-graph", help="draw one graph to JSON")
    gg.add_argument("--kind", required=True)
    gg.add_argument("--L", type=int, required=True)
    gg.add_argument("--p", type=float, default=None)
    gg.add_argument("--lam", type=float, default=None)
    gg.add_argument("--p1", type=float, default=None)
    gg.add_argument("--p2", type=float, default=None)
    gg.add_argument("--deg-lo", dest="deg_lo", type=int, default=None)
    gg.add_argument("--deg-hi", dest="deg_hi", type=int, default=None)
    _add_common(gg)

    spec = sub.add_parser("spectrum", help="complete-graph XXZ level dump")
    spec.add_argument("--L", type=int, required=True)
    spec.add_argument("--delta", type=float, required=True)
    spec.add_argument("--j", type=float, default=1.0)
    _add_common(spec)

    dens = sub.add_parser("density", help="spectral density histogram")
    dens.add_argument("--L", type=int, required=True)
    dens.add_argument("--delta", type=float, required=True)
    dens.add_argument("--j", type=float, default=1.0)
    dens.add_argument("--bins", type=int, default=64)
    _add_common(dens)

    crit = sub.add_parser("critical-point", help="two-spin critical coupling")
    crit.add_argument("--lam", type=float, required=True)
    crit.add_argument("--p1", type=float, required=True)
    crit.add_argument("--p2", type=float, required=True)
    crit.add_argument("--j", type=float, default=1.0)
    _add_common(crit)

    ci = sub.add_parser("corr-image", help="ground-state correlation matrix")
    ci.add_argument("--kind", required=True)
    ci.add_argument("--L", type=int, required=True)
    ci.add_argument("--model", choices=("xxz", "tfi"), default="xxz")
    ci.add_argument("--delta", type=float, default=None)
    ci.add_argument("--h", type=float, default=None)
    ci.add_argument("--axis", choices=("x", "y", "z"), default="z")
    ci.add_argument("--ordering", default="identity")
    ci.add_argument("--p", type=float, default=None)
    ci.add_argument("--lam", type=float, default=None)
    ci.add_argument("--p1", type=float, default=None)
    ci.add_argument("--p2", type=float, default=None)
    ci.add_argument("--deg-lo", dest="deg_lo", type=int, default=None)
    ci.add_argument("--deg-hi", dest="deg_hi", type=int, default=None)
    _add_common(ci)

    theory = sub.add_parser("theory", help="scaling and bound studies")
    tsub = theory.add_subparsers(dest="study", required=True)

    dm = tsub.add_parser("diffmax")
    dm.add_argument("--p", type=float, required=True)
    dm.add_argument("--L", type=str, required=True, help="comma list")
    dm.add_argument("--draws", type=int, default=20)
    dm.add_argument("--jx", type=float, default=-1.0)
    dm.add_argument("--jy", type=float, default=-1.0)
    dm.add_argument("--jz", type=float, default=1.5)
    _add_common(dm)

    ls = tsub.add_parser("lemma-s1")
    ls.add_argument("--trials", type=int, default=1000)
    ls.add_argument("--dim", type=int, default=256)
    ls.add_argument("--betas", type=str, default="0.1,1,10,100")
    _add_common(ls)

    fe = tsub.add_parser("free-energy")
    fe.add_argument("--p", type=float, required=True)
    fe.add_argument("--delta", type=float, default=1.5)
    fe.add_argument("--j", type=float, default=1.0)
    fe.add_argument("--beta", type=float, default=1.0)
    fe.add_argument("--L", type=str, required=True)
    fe.add_argument("--draws", type=int, default=20)
    _add_common(fe)

    cuts = tsub.add_parser("cuts")
    cuts.add_argument("--p", type=float, required=True)
    cuts.add_argument("--L", type=str, required=True)
    cuts.add_argument("--draws", type=int, default=20)
    cuts.add_argument("--mode", choices=("exhaustive", "sampled"),
                      default="exhaustive")
    _add_common(cuts)

    pair = tsub.add_parser("pair")
    pair.add_argument("--lam", type=float, required=True)
    pair.add_argument("--p1", type=float, required=True)
    pair.add_argument("--p2", type=float, required=True)
    pair.add_argument("--delta", type=float, required=True)
    pair.add_argument("--j", type=float, default=1.0)
    pair.add_argument("--L", type=str, required=True)
    pair.add_argument("--draws", type=int, default=5)
    _add_common(pair)

    return ap


# ---------------------------------------------------------------------------
# command bodies


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg.out
    if not out:
        raise ConfigError("no output path: set --out or config 'out'")
    rows, summary, n_failed = run_sweep(cfg, threads=max(1, args.threads))
    base = out[:-4] if out.endswith(".csv") else out
    write_sweep_csv(rows, base + ".csv")
    write_summary_csv(summary, base + "_summary.csv")
    print(f"wrote {base}.csv and {base}_summary.csv "
          f"({len(rows)} cells, {n_failed} failed)")
    return 0 if n_failed == 0 else 2


def _cmd_gen_graph(args) -> int:
    spec = _ensemble_from_args(args)
    g = generate(spec, args.L, Seed(args.seed))
    if not args.out:
        raise ConfigError("gen-graph requires --out")
    write_graph_json(g, args.out)
    print(f"wrote {args.out} (L={g.L}, edges={g.n_edges})")
    return 0


def _cmd_spectrum(args) -> int:
    entries = complete_xxz_spectrum(args.L, args.j, args.delta)
    lines = ["S,M,lambda,degeneracy"]
    for e in entries:
        lines.append(f"{e.S},{e.M},{e.energy:.12g},{e.degeneracy}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out} ({len(entries)} levels)")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_density(args) -> int:
    dens = spectral_density(args.L, args.j, args.delta, args.bins)
    lines = ["L,delta,bin_lo,bin_hi,mass"]
    for i in range(dens.masses.size):
        lines.append(f"{dens.L},{dens.delta:.12g},{dens.bin_edges[i]:.12g},"
                     f"{dens.bin_edges[i + 1]:.12g},{dens.masses[i]:.12g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_critical_point(args) -> int:
    dc = critical_point(args.lam, args.p1, args.p2, args.j)
    print(f"{dc:.12g}")
    return 0


def _cmd_corr_image(args) -> int:
    if not args.out:
        raise ConfigError("corr-image requires --out")
    spec = _ensemble_from_args(args)
    g = generate(spec, args.L, Seed(args.seed))
    if args.model == "xxz":
        params = preset_xxz(1.0, args.delta if args.delta is not None else 0.0)
    else:
        params = preset_tfi(args.h if args.h is not None else 0.0, True)
    op = build(g, params)
    result = lanczos_ground(op, seed=Seed(args.seed, 1))
    order = site_ordering(g, args.ordering)
    corr = corr_matrix(result.state, args.axis, order)
    lines = []
    for row in corr.values:
        lines.append(",".join(f"{x:.12g}" for x in row))
    _atomic_write(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out} ({args.L}x{args.L}, axis={args.axis})")
    return 0


def _write_study(fit, out: str | None) -> None:
    if out:
        base = out[:-4] if out.endswith(".csv") else out
        fit.write_csv(base + ".csv")
        fit.write_sidecar(base + ".json")
        print(f"wrote {base}.csv and {base}.json")
    exp = "degenerate" if fit.degenerate else f"{fit.exponent:.4f}"
    print(f"study {fit.study}: exponent {exp}")


def _cmd_theory(args) -> int:
    if args.study == "diffmax":
        from .hamiltonian import CouplingParams
        params = CouplingParams(jx=args.jx, jy=args.jy, jz=args.jz,
                                s=0.5, pauli=True)
        fit = diffmax_scaling(_parse_int_list(args.L), params, args.p,
                              args.draws, args.seed)
        _write_study(fit, args.out)
        return 0
    if args.study == "lemma-s1":
        betas = _parse_float_list(args.betas)
        violations = lemma_s1_check(args.trials, args.dim, betas, args.seed)
        doc = {"violations": violations, "trials": args.trials,
               "dim": args.dim, "betas": betas, "seed": args.seed}
        if args.out:
            _atomic_write(args.out, json.dumps(doc, indent=1) + "\n")
            print(f"wrote {args.out}")
        print(f"lemma-s1 violations: {violations}")
        return 0 if violations == 0 else 2
    if args.study == "free-energy":
        fits = free_energy_convergence(_parse_int_list(args.L), args.p,
                                       preset_xxz(args.j, args.delta),
                                       [args.beta], args.draws, args.seed)
        _write_study(fits[0], args.out)
        return 0
    if args.study == "cuts":
        fit = cut_concentration(_parse_int_list(args.L), args.p, args.draws,
                                args.mode, args.seed)
        _write_study(fit, args.out)
        return 0
    if args.study == "pair":
        fit = theorem_s2_check(_parse_int_list(args.L), args.lam, args.p1,
                               args.p2, args.j, args.delta, args.seed,
                               n_draws=args.draws)
        _write_study(fit, args.out)
        return 0
    raise ConfigError(f"unknown study {args.study!r}")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    handlers = {"run": _cmd_run, "gen-graph": _cmd_gen_graph,
                "spectrum": _cmd_spectrum, "density": _cmd_density,
                "critical-point": _cmd_critical_point,
                "corr-image": _cmd_corr_image, "theory": _cmd_theory}
    try:
        return handlers[args.command](args)
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
