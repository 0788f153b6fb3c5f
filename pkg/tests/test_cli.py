import json
import os
import subprocess
import sys

import pytest

from gstlab.cli import main
from gstlab.graphio import load_graph


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def graph_file(tmp_path):
    assert run("gen", "--nodes", 30, "--factor", 4, "--seed", 5, "--out", tmp_path) == 0
    return tmp_path / "graph.txt"


def test_gen_edge_list_and_mtx(tmp_path, graph_file):
    g = load_graph(graph_file)
    assert g.n == 30
    assert run("gen", "--nodes", 12, "--p", 0.3, "--mtx", "--out", tmp_path / "m") == 0
    assert load_graph(tmp_path / "m" / "graph.mtx").n == 12
    assert run("gen", "--nodes", 12, "--p", 0.3, "--dag", "--out", tmp_path / "d") == 0


def test_analyze_reports_json(tmp_path, graph_file, capsys):
    assert run("analyze", "--graph", graph_file) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n"] == 30 and doc["config"]["graph"] == str(graph_file)
    assert isinstance(doc["defective"], bool) and doc["eigenvector_rank"] <= 30


def test_gst_emits_basis_json(tmp_path, graph_file):
    out = tmp_path / "o"
    assert run("gst", "--graph", graph_file, "--subspaces", 4, "--out", out) == 0
    doc = json.loads((out / "gst.json").read_text())
    assert doc["M"] == 4 and doc["n"] == 30 and len(doc["groups"]) == 4
    assert sum(len(g["eigenvalues"]) for g in doc["groups"]) == 30


def test_dw_and_filter(tmp_path, graph_file, capsys):
    assert run("dw", "--graph", graph_file, "--subspaces", 6) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["L"] <= 6 and doc["epsilon"] == 1e-3
    assert run("filter", "--graph", graph_file, "--subspaces", 3, "--gains", "1,0,2") == 0
    assert json.loads(capsys.readouterr().out)


def test_survey_defective_csv_shape(tmp_path):
    argv = ["survey-defective", "--sizes", "20,30", "--factors", "2,4,6,8,10", "--trials", 10,
            "--seed", 7, "--format", "csv", "--out", tmp_path]
    assert run(*argv) == 0
    lines = (tmp_path / "survey_defective.csv").read_text().splitlines()
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "N,2/N,4/N,6/N,8/N,10/N"
    assert [l.split(",")[0] for l in body[1:]] == ["20", "30"]
    assert any('"seed": 7' in l for l in lines if l.startswith("# config"))


def test_reruns_are_byte_identical(tmp_path, graph_file):
    for sub in ("a", "b"):
        assert run("gst", "--graph", graph_file, "--subspaces", 3, "--out", tmp_path / sub) == 0
        assert run("variance", "--sizes", 30, "--divisors", "10,5", "--trials", 3, "--seed", 2,
                   "--out", tmp_path / sub) == 0
        assert run("orthogonality", "--sizes", 30, "--divisors", "10", "--graphs", 2, "--seed", 2,
                   "--format", "csv", "--out", tmp_path / sub) == 0
    for name in ("gst.json", "variance.json", "orthogonality.csv", "orthogonality_hist.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_invalid_input_exits_2(tmp_path, graph_file, capsys):
    assert run("gst", "--graph", tmp_path / "missing.txt", "--subspaces", 2) == 2
    assert "--graph" in capsys.readouterr().err
    assert run("gst", "--graph", graph_file, "--subspaces", 0) == 2
    assert "--subspaces" in capsys.readouterr().err
    assert run("filter", "--graph", graph_file, "--subspaces", 3, "--gains", "1,2") == 2
    assert run("survey-defective", "--tol", "bogus=1") == 2
    assert "--tol" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys):
    dag = tmp_path / "dag.txt"
    dag.write_text("n 3\n0 1\n1 2\n")
    assert run("gst", "--graph", dag, "--subspaces", 2) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    env = dict(os.environ, GSTLAB_THREADS="1")
    proc = subprocess.run([sys.executable, "-m", "gstlab", "gen", "--nodes", "5", "--p", "0.5"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and proc.stdout.startswith("#")
    proc = subprocess.run([sys.executable, "-m", "gstlab", "nope"], capture_output=True, text=True)
    assert proc.returncode == 2
