from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from hodgelab import __version__
from hodgelab.cli import app, parse_bands, parse_partition
from hodgelab.errors import ConfigurationError


runner = CliRunner()


def test_cli_version() -> None:
    res = runner.invoke(app, ["version"])
    assert res.exit_code == 0
    assert res.output.strip() == __version__


def test_cli_version_flag() -> None:
    res = runner.invoke(app, ["--version"])
    assert res.exit_code == 0
    assert __version__ in res.output


def test_parse_partition_and_bands() -> None:
    assert parse_partition("1,2,3|4") == ([1, 2, 3], [4])
    assert parse_partition(None) is None
    assert parse_bands("1,1") == (1, 1)
    for bad in ("1,2,3", "1|2|3", "a|b"):
        with pytest.raises(ConfigurationError):
            parse_partition(bad)
    with pytest.raises(ConfigurationError):
        parse_bands("1,2,3")


def test_cli_pages_writes_json(tmp_path: Path) -> None:
    out = tmp_path / "rep.json"
    res = runner.invoke(app, ["pages", "--model", "builtin:iwasawa", "--max-page", "3", "--json", str(out)])
    assert res.exit_code == 0, res.output
    assert "iwasawa: degenerates at E_2" in res.output
    assert f"Wrote JSON: {out}" in res.output
    assert json.loads(out.read_text(encoding="utf-8"))["pages"]["iwasawa"]["degeneration_index"] == 2


def test_cli_pages_needs_model() -> None:
    res = runner.invoke(app, ["pages"])
    assert res.exit_code == 1
    assert "Error:" in res.output


def test_cli_unknown_model_is_input_error() -> None:
    res = runner.invoke(app, ["pages", "--model", "builtin:hopf"])
    assert res.exit_code == 1
    assert "hopf" in res.output


def test_cli_bad_model_file(tmp_path: Path) -> None:
    path = tmp_path / "bad.toml"
    path.write_text("[model]\nn = 2\ngenerators = ['w1', 'w1']\n", encoding="utf-8")
    res = runner.invoke(app, ["pages", "--model", str(path)])
    assert res.exit_code == 1


def test_cli_foliate_bad_partition() -> None:
    res = runner.invoke(app, ["foliate", "--model", "builtin:iwasawa", "--partition", "1,2"])
    assert res.exit_code == 1
    assert "--partition" in res.output


def test_cli_witten(tmp_path: Path) -> None:
    html = tmp_path / "rep.html"
    res = runner.invoke(
        app,
        [
            "witten",
            "--grid", "8",
            "--bands", "1,1",
            "--trials", "2",
            "--phi", "cos(x1)",
            "--no-refine",
            "--html", str(html),
        ],
    )  # fmt: skip
    assert res.exit_code == 0, res.output
    assert "witten: identities ok=True" in res.output
    assert html.exists()


def test_cli_witten_aliasing_is_input_error() -> None:
    res = runner.invoke(app, ["witten", "--grid", "8", "--phi", "cos(x1)"])
    assert res.exit_code == 1
    assert "band budget" in res.output


def test_cli_config_file(tmp_path: Path) -> None:
    cfg = tmp_path / "run.yml"
    cfg.write_text("model: builtin:torus2\nmax_page: 2\n", encoding="utf-8")
    res = runner.invoke(app, ["pages", "--config", str(cfg)])
    assert res.exit_code == 0, res.output
    assert "torus2: degenerates at E_1" in res.output


def test_cli_suite_rejects_non_integrable_model(tmp_path: Path) -> None:
    model = tmp_path / "broken.toml"
    model.write_text(
        '[model]\nn = 4\n\n[d]\nw4 = [{coeff = "1", wedge = ["w1", "w2"]}]\nw1 = [{coeff = "1", wedge = ["w3", "w4"]}]\n',
        encoding="utf-8",
    )
    res = runner.invoke(app, ["suite", "--model", str(model), "--random-metrics", "0"])
    assert res.exit_code == 1
    assert "Error:" in res.output
