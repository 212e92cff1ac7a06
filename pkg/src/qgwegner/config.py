"""Run configuration: one YAML (or JSON) document, unknown keys rejected.

Schema (every block documented in the README)::

    graph:        {generate: {kind, ...params}, sweep?: {param: [values]}}
                  | {vertices: [...], edges: [{id, iota, tau, length}]}
                  | {file: path}
    conditions:   {default: {type, alpha?}, leaves?: {type, alpha?},
                   vertices?: {vertex id: {type, alpha?} | {type: general, A, B}}}
    alloy:        {sites: {template, ...} | [site entries], distribution: {family, params}}
    experiment:   {kind: wegner | ids | ssf-lemmas | validate, ...}
    output:       {dir}
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import alloy, conditions as vc, graph as gr

KINDS = ("wegner", "ids", "ssf-lemmas", "validate")


class ConfigError(ValueError):
    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}" if where else msg)
        self.where = where


def _check_keys(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise ConfigError(where, f"expected a mapping, got {type(d).__name__}")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(where, f"unknown keys {sorted(extra)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigError(where, f"missing keys {missing}")


@dataclass
class Case:
    """One (graph, conditions, model) triple with the edge sets to study on it."""

    graph: gr.MetricGraph
    conditions: vc.ConditionField
    model: alloy.AlloyModel
    edge_sets: list[list[int]]
    label: str = ""


@dataclass
class RunConfig:
    raw: dict
    source: str
    cases: list[Case]
    experiment: dict
    output_dir: Path
    warnings: list[str] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return self.experiment["kind"]

    @property
    def digest(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


# -- blocks -------------------------------------------------------------------

def _graphs(block, base: Path) -> list[tuple[str, gr.MetricGraph]]:
    where = "graph"
    _check_keys(block, {"generate", "sweep", "vertices", "edges", "file"}, where)
    if "file" in block:
        path = base / block["file"]
        if not path.exists():
            raise ConfigError(f"{where}.file", f"no such file {path}")
        return [(str(path), _graph_from_data(yaml.safe_load(path.read_text()), f"{where}.file"))]
    if "generate" in block:
        gen = dict(block["generate"])
        kind = gen.pop("kind", None)
        sweep = block.get("sweep")
        try:
            if sweep is None:
                return [(kind, gr.generate(kind, **gen))]
            _check_keys(sweep, set(sweep), f"{where}.sweep")
            if len(sweep) != 1:
                raise ConfigError(f"{where}.sweep", "sweep exactly one generator parameter")
            (param, values), = sweep.items()
            return [(f"{kind}({param}={v})", gr.generate(kind, **{**gen, param: v})) for v in values]
        except (gr.GraphError, TypeError) as exc:
            raise ConfigError(f"{where}.generate", str(exc)) from exc
    if "sweep" in block:
        raise ConfigError(f"{where}.sweep", "sweep needs a generator")
    return [("inline", _graph_from_data(block, where))]


def _graph_from_data(data, where):
    try:
        return gr.graph_from_dict(data)
    except (gr.GraphError, TypeError, KeyError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from exc


def _conditions(block, g: gr.MetricGraph) -> vc.ConditionField:
    where = "conditions"
    block = block or {}
    _check_keys(block, {"default", "leaves", "vertices"}, where)

    def parse(spec, v, w):
        try:
            return vc.condition_from_dict(spec, g.degree(v))
        except vc.ConditionError as exc:
            raise ConfigError(w, str(exc)) from exc

    default = block.get("default", {"type": "kirchhoff"})
    conds = {}
    for v in g.vertices:
        if g.degree(v) == 0:
            continue
        spec = default
        if g.degree(v) == 1 and "leaves" in block:
            spec = block["leaves"]
        conds[v] = parse(spec, v, f"{where}.default" if spec is default else f"{where}.leaves")
    for key, spec in (block.get("vertices") or {}).items():
        v = int(key)
        if v not in conds:
            raise ConfigError(f"{where}.vertices.{key}", "not a vertex of the graph")
        conds[v] = parse(spec, v, f"{where}.vertices.{key}")
    return vc.ConditionField(conds)


def _model(block, g: gr.MetricGraph) -> alloy.AlloyModel:
    where = "alloy"
    _check_keys(block, {"sites", "distribution"}, where, required=("distribution",))
    try:
        sites = alloy.sites_from_dict(g, block.get("sites", {"template": "indicator"}))
    except (alloy.AlloyError, KeyError, TypeError) as exc:
        raise ConfigError(f"{where}.sites", str(exc)) from exc
    try:
        dist = alloy.distribution_from_dict(block["distribution"])
    except (alloy.AlloyError, TypeError) as exc:
        raise ConfigError(f"{where}.distribution", str(exc)) from exc
    try:
        return alloy.AlloyModel(g, sites, dist)
    except alloy.AlloyError as exc:
        raise ConfigError(where, str(exc)) from exc


def _edge_sets(specs, g: gr.MetricGraph, where) -> list[list[int]]:
    if specs is None:
        return [list(g.edge_ids)]
    out = []
    for i, s in enumerate(specs):
        w = f"{where}[{i}]"
        if isinstance(s, list):
            ids = [int(e) for e in s]
        else:
            _check_keys(s, {"all", "first", "edges", "range"}, w)
            if s.get("all"):
                ids = list(g.edge_ids)
            elif "first" in s:
                ids = list(g.edge_ids[: int(s["first"])])
            elif "range" in s:
                lo, hi = s["range"]
                ids = list(range(int(lo), int(hi)))
            elif "edges" in s:
                ids = [int(e) for e in s["edges"]]
            else:
                raise ConfigError(w, "empty edge-set specification")
        bad = [e for e in ids if not g.has_edge(e)]
        if bad or not ids:
            raise ConfigError(w, f"edges {bad} not in graph" if bad else "edge set is empty")
        out.append(ids)
    return out


def grid_from_spec(spec, where="lambdas") -> np.ndarray:
    if isinstance(spec, dict):
        _check_keys(spec, {"start", "stop", "num"}, where, required=("start", "stop", "num"))
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
    if isinstance(spec, list):
        return np.asarray([float(x) for x in spec])
    raise ConfigError(where, "expected {start, stop, num} or a list of numbers")


def potential_from_spec(spec, where):
    """``{constant: c}`` or ``{edges: {id: value | {breaks, values}}}``."""
    if spec is None:
        return {}
    _check_keys(spec, {"constant", "edges"}, where)
    if "constant" in spec:
        return {"*": float(spec["constant"])}
    out = {}
    for key, v in spec.get("edges", {}).items():
        if isinstance(v, dict):
            _check_keys(v, {"breaks", "values"}, f"{where}.edges.{key}", required=("values",))
            out[int(key)] = alloy.Profile(tuple(float(b) for b in v.get("breaks", [0.0])),
                                          tuple(float(x) for x in v["values"]))
        else:
            out[int(key)] = float(v)
    return out


_EXPERIMENT_KEYS = {
    "wegner": {"kind", "edge_sets", "lambdas", "epsilons", "samples", "seed", "mesh_h",
               "oracle_check", "budget_seconds"},
    "ids": {"kind", "exhaustion", "lambdas", "samples", "seed", "mesh_h", "increment_eps"},
    "ssf-lemmas": {"kind", "lambdas", "mesh_h", "checks"},
    "validate": {"kind", "edge_sets"},
}


def _experiment(block, warnings) -> dict:
    where = "experiment"
    if not isinstance(block, dict) or block.get("kind") not in KINDS:
        raise ConfigError(f"{where}.kind", f"expected one of {list(KINDS)}")
    kind = block["kind"]
    _check_keys(block, _EXPERIMENT_KEYS[kind], where)
    exp = dict(block)
    if "mesh_h" in exp and not float(exp["mesh_h"]) > 0:
        raise ConfigError(f"{where}.mesh_h", "must be > 0")
    if "samples" in exp and int(exp["samples"]) < 1:
        raise ConfigError(f"{where}.samples", "must be >= 1")
    if "lambdas" in exp:
        exp["lambdas"] = grid_from_spec(exp["lambdas"], f"{where}.lambdas")
    if kind == "wegner":
        eps = [float(e) for e in exp.get("epsilons", [0.05])]
        for e in eps:
            if not e > 0:
                raise ConfigError(f"{where}.epsilons", f"epsilon {e} must be > 0")
            if e > 0.5:
                warnings.append(f"{where}.epsilons: epsilon {e} > 1/2 lies outside the Wegner bound's hypothesis")
        exp["epsilons"] = eps
    exp.setdefault("samples", 100)
    exp.setdefault("seed", 0)
    exp.setdefault("mesh_h", 1.0 / 64)
    exp.setdefault("lambdas", np.linspace(0.0, 20.0, 41))
    return exp


def parse_config(data: Any, source: str = "<inline>", base: Path | None = None) -> RunConfig:
    base = base or Path(".")
    _check_keys(data, {"graph", "conditions", "alloy", "experiment", "output"}, "",
                required=("graph", "experiment"))
    warnings: list[str] = []
    exp = _experiment(data["experiment"], warnings)
    graphs = _graphs(data["graph"], base)
    alloy_block = data.get("alloy") or {"distribution": {"family": "uniform", "params": {"a": 0.0, "b": 1.0}}}
    cases = []
    for label, g in graphs:
        cond = _conditions(data.get("conditions"), g)
        model = _model(alloy_block, g)
        if kind_needs_sets(exp["kind"]):
            key = "exhaustion" if exp["kind"] == "ids" else "edge_sets"
            if len(graphs) > 1 and exp.get(key) is not None:
                raise ConfigError(f"experiment.{key}", "a graph sweep uses all edges of each graph")
            sets = _edge_sets(exp.get(key), g, f"experiment.{key}")
        else:
            sets = [list(g.edge_ids)]
        cases.append(Case(g, cond, model, sets, label))
    out = data.get("output") or {}
    _check_keys(out, {"dir"}, "output")
    out_dir = Path(out.get("dir") or os.environ.get("QGWEGNER_OUT", "qgwegner-out"))
    return RunConfig(data, source, cases, exp, out_dir, warnings)


def kind_needs_sets(kind):
    return kind in ("wegner", "ids", "validate")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError("", f"config file {path} does not exist")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "?"
        raise ConfigError(str(path), f"YAML syntax error at {loc}: {getattr(exc, 'problem', exc)}") from exc
    return parse_config(data, str(path), path.parent)
