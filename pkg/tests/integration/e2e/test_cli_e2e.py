from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from hodgelab.cli import app

pytestmark = pytest.mark.e2e

runner = CliRunner()

MODEL_TOML = """
[model]
n = 3
generators = ["w1", "w2", "w3"]

[d]
w3 = [{coeff = "-1", wedge = ["w1", "w2"]}]
"""


def test_pages_from_model_file_matches_builtin(tmp_path: Path):
    model = tmp_path / "iwasawa.toml"
    model.write_text(MODEL_TOML, encoding="utf-8")
    out_file = tmp_path / "file.json"
    out_builtin = tmp_path / "builtin.json"
    res = runner.invoke(app, ["pages", "--model", str(model), "--json", str(out_file)])
    assert res.exit_code == 0, res.output
    res = runner.invoke(app, ["pages", "--model", "builtin:iwasawa", "--json", str(out_builtin)])
    assert res.exit_code == 0, res.output

    from_file = json.loads(out_file.read_text(encoding="utf-8"))
    builtin = json.loads(out_builtin.read_text(encoding="utf-8"))
    (file_pages,) = from_file["pages"].values()
    assert file_pages["dims"] == builtin["pages"]["iwasawa"]["dims"]
    assert file_pages["betti"] == [1, 4, 8, 10, 8, 4, 1]


def test_certify_torus_fires_gap(tmp_path: Path):
    out = tmp_path / "rep.json"
    html = tmp_path / "rep.html"
    res = runner.invoke(app, ["certify", "--model", "builtin:torus3", "--json", str(out), "--html", str(html)])
    assert res.exit_code == 0, res.output
    data = json.loads(out.read_text(encoding="utf-8"))
    cert = data["certificates"]["torus3"]
    assert any(c["name"] == "GAP" and c["fired"] for c in cert["e2"])
    assert data["identities"]["torus3"]["ok"] is True
    assert "Certificates: torus3" in html.read_text(encoding="utf-8")


def test_runs_are_deterministic(tmp_path: Path):
    outs = []
    out = tmp_path / "rep.json"
    for _ in range(2):
        res = runner.invoke(
            app,
            ["hodge", "--model", "builtin:kodaira_thurston", "--metric", "random", "--seed", "7", "--json", str(out)],
        )
        assert res.exit_code == 0, res.output
        outs.append(json.loads(out.read_text(encoding="utf-8")))
    assert outs[0] == outs[1]


def test_witten_with_decomposition(tmp_path: Path):
    out = tmp_path / "rep.json"
    res = runner.invoke(
        app,
        ["witten", "--grid", "12", "--bands", "1,1", "--trials", "3", "--decompose", "--json", str(out)],
    )
    assert res.exit_code == 0, res.output
    payload = json.loads(out.read_text(encoding="utf-8"))["identities"]["witten"]
    assert payload["ok"] is True
    assert payload["decomposition"]["ok"] is True


def test_small_suite(tmp_path: Path):
    cfg = tmp_path / "suite.yml"
    cfg.write_text(
        "witten:\n  grid: 8\n  bands: [1, 1]\n  trials: 2\n"
        "foliation_grid:\n  grid: 12\n  bands: [1, 1]\n  trials: 1\n",
        encoding="utf-8",
    )
    out = tmp_path / "suite.json"
    res = runner.invoke(
        app,
        ["suite", "--config", str(cfg), "--model", "builtin:torus2", "--random-metrics", "1", "--json", str(out)],
    )
    assert res.exit_code in (0, 2), res.output
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["suite"]["models"] == ["torus2", "witten-n1", "witten-n2", "foliation-grid-n2"]
    assert data["pages"]["torus2"]["degeneration_index"] == 1
    assert "witten-n1" in data["identities"]
    assert "BKN1" in data["suite"]["coverage"]
