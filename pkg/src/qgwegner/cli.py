"""Command-line front end: ``qgwegner validate CONFIG`` and ``qgwegner run CONFIG``.

Exit codes: 0 success, 1 validation failure, 2 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import alloy, conditions as vc, experiments as ex, kernels
from .config import ConfigError, RunConfig, load_config, potential_from_spec

log = logging.getLogger("qgwegner")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

WEGNER_COLUMNS = ("lambda", "epsilon", "n_edges", "samples", "mean_count", "stderr",
                  "s_mu_4eps", "bound", "ratio")
IDS_COLUMNS = ("step", "n_edges", "volume", "samples", "lambda", "ids", "stderr")
LEMMA_COLUMNS = ("lemma", "fixture", "lambda", "xi", "xi_local", "bound", "ok")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) or isinstance(x, np.floating):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _header(cfg: RunConfig, seed) -> list[str]:
    return [f"# config_sha256={cfg.digest} seed={seed}"]


def write_csv(path: Path, header: list[str], columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])


# -- validate -----------------------------------------------------------------

def _vertex_reports(cfg: RunConfig):
    bad = []
    lines = []
    for case in cfg.cases:
        for v in sorted(case.conditions.conditions):
            cond = case.conditions[v]
            rep = vc.validate(cond)
            status = "ok" if rep.ok else "INVALID: " + "; ".join(rep.failures())
            lines.append(f"  vertex {v} ({cond.tag}, degree {cond.degree}): {status}")
            if not rep.ok:
                bad.append((case.label, v))
    return lines, bad


def cmd_validate(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    ok = True
    for w in cfg.warnings:
        print(f"warning: {w}", file=out)
    for case in cfg.cases:
        print(f"graph {case.label}: {len(case.graph.vertices)} vertices, {len(case.graph.edges)} edges",
              file=out)
        for edges in case.edge_sets:
            cover = alloy.check_covering(case.model, edges)
            line = f"  |Lambda| = {len(edges)}: kappa = {cover.kappa:.6g}, |Lambda^u| = {len(cover.sites)}"
            if cover.holds:
                s = alloy.summability_constants(case.model, edges, cover)
                line += f", C1 = {s.C1:.6g}, C2 = {s.C2:.6g}, C3 = {s.C3:.6g}"
            else:
                line += "  covering FAILS"
                ok = False
            print(line, file=out)
    lines, bad = _vertex_reports(cfg)
    print("vertex conditions:", file=out)
    for line in lines:
        print(line, file=out)
    if bad:
        ok = False
        print("invalid vertices: " + ", ".join(f"{v}" + (f" [{lab}]" if len(cfg.cases) > 1 else "")
                                               for lab, v in bad), file=out)
    print("validation " + ("passed" if ok else "FAILED"), file=out)
    return EXIT_OK if ok else EXIT_INVALID


# -- run ----------------------------------------------------------------------

def _run_wegner(cfg: RunConfig, opts, out_dir: Path, out) -> list[str]:
    exp = cfg.experiment
    sets = []
    for case in cfg.cases:
        rep = ex.run_wegner(case.model, case.conditions, case.edge_sets, exp["lambdas"],
                            exp["epsilons"], opts["samples"], opts["seed"], opts["mesh_h"],
                            threads=opts["threads"], oracle_dense=opts["oracle_dense"],
                            oracle_check=int(exp.get("oracle_check", 0)),
                            budget_seconds=exp.get("budget_seconds"))
        sets.extend(rep.sets)
    report = ex.WegnerReport(sets, cfg.cases[0].model.distribution, opts["seed"])
    header = _header(cfg, opts["seed"]) + [
        "# bound = s(mu, 4 eps / kappa) * n_edges; ratio = mean_count / bound",
    ]
    write_csv(out_dir / "wegner.csv", header, WEGNER_COLUMNS, report.rows())
    lines = []
    for ws in sets:
        lines.append(f"|Lambda| = {ws.n_edges}  dofs = {ws.n_dofs}  kappa = {ws.kappa:.6g}  "
                     f"C1 = {ws.C1:.4g}  C2 = {ws.C2:.4g}  C3 = {ws.C3:.4g}  "
                     f"proof constant = {ws.proof_constant:.4g}")
        for j, eps in enumerate(ws.epsilons):
            lines.append(f"  eps = {eps:g}: max mean count = {ws.max_mean[j]:.6g}  "
                         f"max ratio = {ws.max_ratio[j]:.6g}  "
                         f"max mean / |Lambda| = {ws.max_mean[j] / ws.n_edges:.6g}")
        lines.append(f"  proof-bound violations: {ws.proof_bound_violations()}")
        if ws.oracle_checked:
            lines.append(f"  dense-oracle mismatches: {ws.oracle_mismatches} over {ws.oracle_checked} samples")
        if len(ws.epsilons) > 1:
            lines.append(f"  log-log slope of max mean vs eps: {ws.slope():.4g}")
    if len(sets) > 1:
        per = np.array([ws.max_mean / ws.n_edges for ws in sets])
        for j, eps in enumerate(sets[0].epsilons):
            col = per[:, j]
            lines.append(f"eps = {eps:g}: spread of max mean / |Lambda| across sets = "
                         f"{col.max() / col.min() if col.min() > 0 else math.inf:.4g}")
    return lines


def _run_ids(cfg: RunConfig, opts, out_dir: Path, out) -> list[str]:
    exp = cfg.experiment
    curves = []
    for case in cfg.cases:
        curves.extend(ex.run_ids(case.model, case.conditions, case.edge_sets, exp["lambdas"],
                                 opts["samples"], opts["seed"], opts["mesh_h"],
                                 increment_eps=[float(e) for e in exp.get("increment_eps", [])],
                                 threads=opts["threads"], oracle_dense=opts["oracle_dense"]))
    if len(cfg.cases) > 1:
        for k, c in enumerate(curves, start=1):
            c.step = k

    def rows():
        for c in curves:
            for i, lam in enumerate(c.lambdas):
                yield {"step": c.step, "n_edges": c.n_edges, "volume": c.volume, "samples": c.samples,
                       "lambda": float(lam), "ids": float(c.values[i]), "stderr": float(c.stderr[i])}

    write_csv(out_dir / "ids.csv", _header(cfg, opts["seed"]), IDS_COLUMNS, rows())
    lines = [f"step {c.step}: |Lambda| = {c.n_edges}, volume = {c.volume:.6g}, "
             f"N(max lambda) = {c.values[-1]:.6g}" for c in curves]
    for k, d in enumerate(ex.self_convergence(curves), start=1):
        lines.append(f"sup |N_{k + 1} - N_{k}| = {d:.6g}")
    for c in curves:
        for e, inc in sorted(c.increments.items()):
            lines.append(f"step {c.step}: max increment over eps = {e:g}: {float(np.max(inc)):.6g}")
    return lines


def _expand(pot, graph):
    if "*" in pot:
        return {e: pot["*"] for e in graph.edge_ids}
    return pot


def _run_lemmas(cfg: RunConfig, opts, out_dir: Path, out) -> list[str]:
    exp = cfg.experiment
    checks = exp.get("checks") or []
    if len(cfg.cases) != 1:
        raise ConfigError("graph.sweep", "ssf-lemmas runs on a single graph")
    case = cfg.cases[0]
    reports = []
    for i, chk in enumerate(checks):
        where = f"experiment.checks[{i}]"
        extra = set(chk) - {"name", "lemma", "region", "W1", "W2"}
        if extra:
            raise ConfigError(where, f"unknown keys {sorted(extra)}")
        W1 = _expand(potential_from_spec(chk.get("W1"), f"{where}.W1"), case.graph)
        W2 = _expand(potential_from_spec(chk.get("W2"), f"{where}.W2"), case.graph)
        name = str(chk.get("name", f"check{i}"))
        lemma = chk.get("lemma")
        if lemma == "graph":
            if "region" not in chk:
                raise ConfigError(where, "graph lemma needs a region")
            r = ex.verify_lemma_graph(case.graph, case.conditions, [int(e) for e in chk["region"]],
                                      W1, W2, exp["lambdas"], opts["mesh_h"], name=name,
                                      oracle_dense=opts["oracle_dense"])
        elif lemma == "edge":
            r = ex.verify_lemma_edge(case.graph, case.conditions, W1, W2, exp["lambdas"],
                                     opts["mesh_h"], name=name, oracle_dense=opts["oracle_dense"])
        else:
            raise ConfigError(f"{where}.lemma", "expected 'graph' or 'edge'")
        reports.append(r)

    def rows():
        for r in reports:
            for i, lam in enumerate(r.lambdas):
                yield {"lemma": r.lemma, "fixture": r.fixture, "lambda": float(lam), "xi": int(r.xi[i]),
                       "xi_local": int(r.xi_local[i]) if r.xi_local is not None else "",
                       "bound": float(r.bound[i]), "ok": bool(abs(r.xi[i]) <= r.bound[i])}

    write_csv(out_dir / "lemmas.csv", _header(cfg, "none"), LEMMA_COLUMNS, rows())
    return [f"{r.lemma} lemma [{r.fixture}]: max |xi| = {int(np.max(np.abs(r.xi)))}, "
            f"failures = {r.failures} / {len(r.lambdas)}  {'PASS' if r.ok else 'FAIL'}" for r in reports]


def cmd_run(cfg: RunConfig, opts, out=None) -> int:
    out = out or sys.stdout
    lines, bad = _vertex_reports(cfg)
    if bad:
        for line in lines:
            print(line, file=out)
        print("invalid vertex conditions at " + ", ".join(str(v) for _, v in bad), file=out)
        return EXIT_INVALID
    for case in cfg.cases:
        odd = [v for v, c in case.conditions.conditions.items() if c.tag not in vc.DISCRETIZABLE]
        if odd:
            print(f"vertices {odd}: only dirichlet, neumann, kirchhoff and delta conditions can be "
                  "discretized", file=out)
            return EXIT_INVALID
    for w in cfg.warnings:
        print(f"warning: {w}", file=out)
    kind = cfg.kind
    if kind == "validate":
        return cmd_validate(cfg, out)
    out_dir = Path(opts["out"]) if opts.get("out") else cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    runner = {"wegner": _run_wegner, "ids": _run_ids, "ssf-lemmas": _run_lemmas}[kind]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lines = runner(cfg, opts, out_dir, out)
    head = [f"experiment: {kind}", f"config: {cfg.source} (sha256 {cfg.digest})",
            f"seed: {opts['seed']}  samples: {opts['samples']}  mesh h: {opts['mesh_h']:g}",
            f"kernel backend: {kernels.BACKEND}"]
    text = "\n".join(head + lines) + "\n"
    (out_dir / "summary.txt").write_text(text)
    out.write(text)
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgwegner",
                                description="Random Schroedinger operators on metric graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", help="check conditions, covering and summability constants")
    v.add_argument("config")
    r = sub.add_parser("run", help="run the experiment block")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--samples", type=int)
    r.add_argument("--mesh", type=float, help="mesh size h")
    r.add_argument("--out", help="output directory (default: config, then $QGWEGNER_OUT)")
    r.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    r.add_argument("--oracle-dense", action="store_true",
                   help="count eigenvalues from dense eigensolves instead of factorizations")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except (ConfigError, vc.ConditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "validate":
        return cmd_validate(cfg)
    exp = cfg.experiment
    opts = {
        "seed": args.seed if args.seed is not None else int(exp["seed"]),
        "samples": args.samples if args.samples is not None else int(exp["samples"]),
        "mesh_h": args.mesh if args.mesh is not None else float(exp["mesh_h"]),
        "threads": max(1, args.threads),
        "oracle_dense": args.oracle_dense,
        "out": args.out,
    }
    if opts["samples"] < 1 or not opts["mesh_h"] > 0:
        print("error: --samples must be >= 1 and --mesh > 0", file=sys.stderr)
        return EXIT_INVALID
    try:
        return cmd_run(cfg, opts)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ex.CoveringFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ArithmeticError, RuntimeError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
