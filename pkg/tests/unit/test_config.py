from __future__ import annotations

from pathlib import Path

import pytest
import yaml

from hodgelab.config import RunConfig, Tolerances, WittenSettings
from hodgelab.errors import ConfigurationError


def test_defaults():
    cfg = RunConfig()
    assert cfg.command == "suite"
    assert cfg.backend == "exact"
    assert cfg.metric == "identity"
    assert cfg.tolerances.rank_rel == 1e-10
    assert cfg.tolerances.grid_spectral == 1e-6
    assert cfg.witten.bands == (2, 1)
    assert cfg.foliation_grid.r == 1
    assert cfg.timing is False


def test_yaml_roundtrip(tmp_path: Path):
    cfg = RunConfig(command="pages", model="builtin:iwasawa", max_page=3, seed=5)
    path = tmp_path / "run.yml"
    cfg.to_yaml(str(path))
    loaded = RunConfig.from_yaml(str(path))
    assert loaded == cfg
    assert yaml.safe_load(path.read_text())["model"] == "builtin:iwasawa"


@pytest.mark.parametrize(
    "data",
    [
        {"command": "pages"},
        {"command": "hodge", "model": "builtin:iwasawa", "backend": "quad"},
        {"command": "witten", "witten": {"grid": 3}},
        {"command": "witten", "witten": {"trials": 0}},
        {"max_page": 0},
        {"random_metrics": -1},
        {"tolerances": {"rank_rel": 0}},
        {"foliation_grid": {"n": 2, "r": 2}},
        {"command": "foliate", "model": "builtin:iwasawa"},
        {"command": "foliate", "model": "builtin:iwasawa", "partition": [[1, 2], [2, 3]]},
        {"command": "foliate", "model": "builtin:iwasawa", "partition": [[1, 2], []]},
        {"command": "foliate", "model": "builtin:iwasawa", "partition": [[0, 1], [2]]},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(data)


def test_foliate_accepts_builtin_foliation_or_partition():
    RunConfig.from_dict({"command": "foliate", "model": "builtin:heisenberg_plus_abelian"})
    cfg = RunConfig.from_dict({"command": "foliate", "model": "builtin:iwasawa", "partition": [[1, 2], [3]]})
    assert cfg.partition == ([1, 2], [3])


def test_missing_config_file(tmp_path: Path):
    with pytest.raises(ConfigurationError):
        RunConfig.from_yaml(str(tmp_path / "nope.yml"))
    with pytest.raises(ConfigurationError):
        RunConfig.merged("suite", str(tmp_path / "nope.yml"))


def test_merged_overrides_file(tmp_path: Path):
    path = tmp_path / "run.yml"
    path.write_text("seed: 3\nmax_page: 2\nwitten:\n  grid: 12\n  trials: 4\n", encoding="utf-8")
    cfg = RunConfig.merged("witten", str(path), seed=9, max_page=None, witten_trials=2, witten_phi="cos(x1)")
    assert cfg.command == "witten"
    assert cfg.seed == 9
    assert cfg.max_page == 2
    assert cfg.witten.grid == 12
    assert cfg.witten.trials == 2
    assert cfg.witten.phi == "cos(x1)"


def test_merged_rejects_non_mapping(tmp_path: Path):
    path = tmp_path / "run.yml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        RunConfig.merged("suite", str(path))


def test_settings_validators():
    assert Tolerances(grid_exact=1).grid_exact == 1.0
    assert WittenSettings(bands=[1, 1]).bands == (1, 1)
