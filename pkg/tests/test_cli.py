from pathlib import Path

import pytest
import yaml

from qgwegner import cli
from qgwegner.config import ConfigError, load_config, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _small(tmp_path, **exp):
    data = {
        "graph": {"generate": {"kind": "path", "n": 4, "length": 1.0}},
        "conditions": {"default": {"type": "kirchhoff"}},
        "alloy": {"sites": {"template": "indicator"},
                  "distribution": {"family": "uniform", "params": {"a": 0.0, "b": 1.0}}},
        "experiment": {"kind": "wegner", "lambdas": {"start": 0, "stop": 20, "num": 5},
                       "epsilons": [0.05, 0.1], "samples": 3, "seed": 1, "mesh_h": 0.125, **exp},
        "output": {"dir": str(tmp_path / "out")},
    }
    p = tmp_path / "c.yaml"
    p.write_text(yaml.safe_dump(data))
    return p, data


def test_validate_ok(capsys):
    assert cli.main(["validate", str(CONFIGS / "validate_path8.yaml")]) == 0
    out = capsys.readouterr().out
    assert "kappa = 1" in out and "C3 = 1" in out and "|Lambda^u| = 8" in out


def test_validate_names_invalid_vertex(capsys):
    assert cli.main(["validate", str(CONFIGS / "invalid_vertex.yaml")]) == 1
    out = capsys.readouterr().out
    assert "invalid vertices: 3" in out


def test_validate_warns_on_large_epsilon(tmp_path, capsys):
    p, _ = _small(tmp_path, epsilons=[0.6])
    assert cli.main(["validate", str(p)]) == 0
    assert "warning" in capsys.readouterr().out


def test_run_writes_documented_csv(tmp_path, capsys):
    p, _ = _small(tmp_path)
    assert cli.main(["run", str(p), "--threads", "1"]) == 0
    lines = (tmp_path / "out" / "wegner.csv").read_text().splitlines()
    assert lines[0].startswith("# config_sha256=") and "seed=1" in lines[0]
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == ",".join(cli.WEGNER_COLUMNS)
    assert len([l for l in lines if not l.startswith("#")]) == 1 + 5 * 2
    summary = (tmp_path / "out" / "summary.txt").read_text()
    assert "max ratio" in summary
    assert "max ratio" in capsys.readouterr().out


def test_run_overrides_and_single_sample(tmp_path):
    p, _ = _small(tmp_path)
    out = tmp_path / "o2"
    assert cli.main(["run", str(p), "--samples", "1", "--seed", "5", "--mesh", "0.25",
                     "--out", str(out)]) == 0
    text = (out / "wegner.csv").read_text()
    assert "seed=5" in text
    row = text.splitlines()[-1].split(",")
    assert row[3] == "1" and row[5] == "nan"


def test_same_seed_same_files(tmp_path):
    p, _ = _small(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", str(p), "--out", str(a), "--threads", "1"]) == 0
    assert cli.main(["run", str(p), "--out", str(b), "--threads", "2"]) == 0
    assert (a / "wegner.csv").read_bytes() == (b / "wegner.csv").read_bytes()


def test_env_output_dir(tmp_path, monkeypatch):
    p, data = _small(tmp_path)
    del data["output"]
    p.write_text(yaml.safe_dump(data))
    monkeypatch.setenv("QGWEGNER_OUT", str(tmp_path / "envout"))
    assert cli.main(["run", str(p)]) == 0
    assert (tmp_path / "envout" / "wegner.csv").exists()


def test_oracle_dense_flag_gives_same_csv_body(tmp_path):
    p, _ = _small(tmp_path)
    assert cli.main(["run", str(p), "--out", str(tmp_path / "x")]) == 0
    assert cli.main(["run", str(p), "--out", str(tmp_path / "y"), "--oracle-dense"]) == 0
    assert (tmp_path / "x" / "wegner.csv").read_text() == (tmp_path / "y" / "wegner.csv").read_text()


def test_covering_failure_is_runtime_error(tmp_path):
    p, data = _small(tmp_path)
    data["alloy"]["sites"] = [{"site": 0, "pieces": [{"edge": 0, "values": [1.0]}]}]
    p.write_text(yaml.safe_dump(data))
    assert cli.main(["run", str(p)]) == 2


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d.update(extra=1), "unknown keys"),
    (lambda d: d["experiment"].update(epsilon=[0.1]), "experiment"),
    (lambda d: d["experiment"].update(kind="nope"), "experiment.kind"),
    (lambda d: d["experiment"].update(epsilons=[-0.1]), "experiment.epsilons"),
    (lambda d: d["experiment"].update(mesh_h=0), "experiment.mesh_h"),
    (lambda d: d["experiment"].update(samples=0), "experiment.samples"),
    (lambda d: d["graph"]["generate"].update(kind="torus"), "graph.generate"),
    (lambda d: d["alloy"]["distribution"].update(family="cauchy"), "alloy.distribution"),
    (lambda d: d["conditions"].update(vertices={99: {"type": "dirichlet"}}), "conditions.vertices.99"),
    (lambda d: d["experiment"].update(edge_sets=[{"edges": [0, 42]}]), "experiment.edge_sets[0]"),
])
def test_config_errors_name_the_field(tmp_path, mutate, where):
    _, data = _small(tmp_path)
    mutate(data)
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert where in str(err.value)


def test_yaml_syntax_error_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("graph:\n  generate: {kind: path\nexperiment: 1\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(p)
    assert cli.main(["validate", str(p)]) == 1
    assert cli.main(["validate", str(tmp_path / "missing.yaml")]) == 1


def test_graph_file_and_sweep(tmp_path):
    from qgwegner import graph as gr
    (tmp_path / "g.yaml").write_text(yaml.safe_dump(gr.star(3).to_dict()))
    _, data = _small(tmp_path)
    data["graph"] = {"file": "g.yaml"}
    cfg = parse_config(data, base=tmp_path)
    assert len(cfg.cases[0].graph.edges) == 3
    data["graph"] = {"generate": {"kind": "path"}, "sweep": {"n": [2, 3]}}
    cfg = parse_config(data)
    assert [len(c.graph.edges) for c in cfg.cases] == [2, 3]
    assert cfg.cases[1].edge_sets == [[0, 1, 2]]
    data["graph"]["file"] = "nope.yaml"
    with pytest.raises(ConfigError, match="graph.file"):
        parse_config(data, base=tmp_path)


@pytest.mark.parametrize("name", ["lemma_edge_single", "lemma_graph_path"])
def test_lemma_configs_run(tmp_path, name, capsys):
    assert cli.main(["run", str(CONFIGS / f"{name}.yaml"), "--out", str(tmp_path)]) == 0
    assert "PASS" in capsys.readouterr().out
    assert (tmp_path / "lemmas.csv").read_text().startswith("# config_sha256=")


def test_ids_config_runs(tmp_path):
    assert cli.main(["run", str(CONFIGS / "ids_path.yaml"), "--samples", "5", "--out", str(tmp_path)]) == 0
    assert "step,n_edges" in (tmp_path / "ids.csv").read_text()


def test_run_rejects_invalid_vertex(tmp_path):
    assert cli.main(["run", str(CONFIGS / "invalid_vertex.yaml"), "--out", str(tmp_path)]) == 1
