import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from uncertkit import MultivariateNormal
from uncertkit.cli import run_cli
from uncertkit.datasets import example_csv_path
from uncertkit.io import load_distributions, load_document, save_distributions


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("UNCERTKIT_SEED", raising=False)


def parse_svg(path):
    text = path.read_text()
    assert text.startswith("<?xml")
    return ET.fromstring(text.split("\n", 1)[1])


def run(*argv):
    return run_cli([str(a) for a in argv])


def test_full_pipeline(tmp_path, capsys):
    fitted, reduced, svg = tmp_path / "fit.json", tmp_path / "red.json", tmp_path / "plot.svg"
    assert run("fit", "--input", example_csv_path(), "--group-by", "group", "--output", fitted) == 0
    assert run("transform", "--input", fitted, "--method", "uamds", "--dims", 2, "--output", reduced) == 0
    assert run("plot", "--input", reduced, "--kind", "contour", "--output", svg) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 3 and all("->" in line for line in out)
    root = parse_svg(svg)
    assert root.tag.endswith("svg")
    doc = load_document(reduced)
    prov = doc["provenance"]
    assert prov["transform"] == "uamds" and prov["converged"] in (True, False)
    assert len(doc["maps"]) == 3
    assert [d.name for d in load_distributions(reduced)] == ["alpha", "beta", "gamma"]


def test_byte_identical_runs(tmp_path):
    outputs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        assert run("dataset", "--count", 4, "--dim", 3, "--seed", 5, "--output", d / "b.json") == 0
        assert run("transform", "--input", d / "b.json", "--method", "uamds", "--init", "random",
                   "--seed", 3, "--max-iter", 300, "--output", d / "r.json") == 0
        for kind in ("scatter", "isoband", "swarm"):
            src = d / ("r.json" if kind != "swarm" else "b.json")
            assert run("plot", "--input", src, "--kind", kind, "--seed", 1, "--output", d / f"{kind}.svg") == 0
        outputs.append(sorted((p.name, p.read_bytes()) for p in d.iterdir()))
    assert outputs[0] == outputs[1]


def test_env_seed(tmp_path, monkeypatch):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    assert run("dataset", "--seed", 42, "--output", a) == 0
    monkeypatch.setenv("UNCERTKIT_SEED", "42")
    assert run("dataset", "--output", b) == 0
    assert run("dataset", "--seed", 1, "--output", c) == 0
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_default_seed_logged(tmp_path, capsys):
    assert run("-v", "dataset", "--output", tmp_path / "a.json") == 0
    assert "seed 0" in capsys.readouterr().err


def test_bad_env_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("UNCERTKIT_SEED", "minus one")
    assert run("dataset", "--output", tmp_path / "a.json") == 1


@pytest.mark.parametrize("argv", [
    ["transform", "--input", "x.json"],
    ["plot", "--input", "x.json", "--kind", "pie", "--output", "o.svg"],
    ["dataset", "--output", "o.json", "--bogus"],
    ["dataset", "--count", "0", "--output", "o.json"],
    ["plot", "--input", "x.json", "--kind", "contour", "--quantiles", "0.9,0.5", "--output", "o.svg"],
    [],
])
def test_usage_errors(argv, tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run_cli(argv) == 1
    assert "usage" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_missing_input_exit_2(tmp_path, capsys):
    assert run("plot", "--input", tmp_path / "none.json", "--kind", "box", "--output", tmp_path / "o.svg") == 2
    assert "cannot read" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_scatter_on_nd_input(tmp_path, capsys):
    src = tmp_path / "b.json"
    assert run("dataset", "--dim", 4, "--output", src) == 0
    assert run("plot", "--input", src, "--kind", "scatter", "--output", tmp_path / "s.svg") == 2
    err = capsys.readouterr().err
    assert "--kind matrix" in err and "transform" in err
    assert not (tmp_path / "s.svg").exists()


def test_univariate_marginals(tmp_path):
    src = tmp_path / "b.json"
    assert run("dataset", "--count", 2, "--dim", 3, "--output", src) == 0
    out = tmp_path / "box.svg"
    assert run("plot", "--input", src, "--kind", "box", "--output", out) == 0
    boxes = parse_svg(out).findall("{http://www.w3.org/2000/svg}polygon")
    assert len(boxes) == 6
    assert out.read_text().count("blob1[2]") == 1


def test_matrix_cli(tmp_path):
    src = tmp_path / "b.json"
    assert run("dataset", "--count", 2, "--dim", 3, "--output", src) == 0
    out = tmp_path / "m.svg"
    assert run("plot", "--input", src, "--kind", "matrix", "--diag", "density", "--output", out) == 0
    assert parse_svg(out).get("viewBox") == "0 0 600 600"


def test_singular_covariance_contour(tmp_path):
    src = tmp_path / "s.json"
    save_distributions([MultivariateNormal([0, 0], [[1, 1], [1, 1]])], src)
    assert run("plot", "--input", src, "--kind", "contour", "--output", tmp_path / "c.svg") == 0


def test_uapca_provenance(tmp_path):
    src, out = tmp_path / "b.json", tmp_path / "r.json"
    assert run("dataset", "--output", src) == 0
    assert run("transform", "--input", src, "--method", "uapca", "--output", out) == 0
    prov = load_document(out)["provenance"]
    assert prov["transform"] == "uapca" and prov["final_stress"] >= 0


def test_pipeline_config(tmp_path, capsys):
    cfg = {
        "seed": 3,
        "input": {"path": str(example_csv_path()), "format": "csv", "group_by": "group"},
        "fit": {"method": "gaussian", "output": "fit.json"},
        "transform": {"method": "uapca", "dims": 2, "output": "red.json"},
        "plots": [{"kind": "isoband", "quantiles": [0.5, 0.9], "output": "bands.svg"},
                  {"kind": "scatter", "samples": 20, "output": "pts.svg"}],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run("pipeline", "--config", path) == 0
    assert "4 file" in capsys.readouterr().out
    assert sorted(p.name for p in tmp_path.iterdir()) == ["bands.svg", "cfg.json", "fit.json", "pts.svg", "red.json"]
    assert len(parse_svg(tmp_path / "pts.svg").findall("{http://www.w3.org/2000/svg}circle")) == 60


def test_pipeline_error_writes_nothing(tmp_path):
    cfg = {"input": {"path": str(example_csv_path()), "format": "csv", "group_by": "group"},
           "fit": {"output": "fit.json"}, "plots": [{"kind": "scatter", "output": "p.svg"}]}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run("pipeline", "--config", path) == 2
    assert [p.name for p in tmp_path.iterdir()] == ["cfg.json"]


def test_numeric_failure_exit_3(tmp_path, capsys):
    src = tmp_path / "h.json"
    big = 1e200
    save_distributions([MultivariateNormal([0, 0], np.eye(2) * big), MultivariateNormal([big, 0], np.eye(2) * big)], src)
    code = run("transform", "--input", src, "--method", "uamds", "--output", tmp_path / "o.json")
    assert code == 3
    assert "numeric failure" in capsys.readouterr().err
    assert not (tmp_path / "o.json").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "uncertkit", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "uncertkit" in proc.stdout
