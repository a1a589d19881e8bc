from __future__ import annotations

import json
from pathlib import Path

import pytest

from hodgelab import runner as runner_module
from hodgelab.config import RunConfig
from hodgelab.errors import ConfigurationError, ModelLookupError, TheoremViolationError
from hodgelab.runner import load_complex, run, run_suite


def test_pages_run_writes_artifacts(tmp_path: Path):
    cfg = RunConfig(
        command="pages",
        model="builtin:iwasawa",
        max_page=3,
        output=str(tmp_path / "rep.json"),
        html_output=str(tmp_path / "rep.html"),
    )
    doc = run(cfg)
    assert doc.ok
    assert doc.exit_code == 0
    payload = doc.pages["iwasawa"]
    assert payload["degeneration_index"] == 2
    assert payload["dims"]["E2"]["1,0"] == 2
    data = json.loads((tmp_path / "rep.json").read_text(encoding="utf-8"))
    assert data["pages"]["iwasawa"]["betti"] == [1, 4, 8, 10, 8, 4, 1]
    assert data["timing_ms"] == {}
    assert (tmp_path / "rep.html").exists()
    assert "OK: True" in doc.to_text()


def test_pages_backend_both():
    doc = run(RunConfig(command="pages", model="builtin:kodaira_thurston", backend="both", timing=True))
    payload = doc.pages["kodaira_thurston"]
    assert payload["backend_agreement"] is True
    assert payload["degeneration_index"] == 1
    assert "pages" in doc.timing_ms


def test_hodge_run():
    doc = run(RunConfig(command="hodge", model="builtin:iwasawa"))
    payload = doc.hodge["iwasawa"]
    assert payload["iso"]["ok"] is True
    assert payload["e2_quotient"]["1,0"] == 2
    assert payload["flags"]["SKT"] is False


def test_certify_run_with_random_metric():
    doc = run(RunConfig(command="certify", model="builtin:torus2", metric="random", seed=4, explore=2))
    assert doc.ok
    cert = doc.certificates["torus2"]
    assert cert["degeneration_index"] == 1
    assert any(c["name"] == "GAP" and c["fired"] for c in cert["e2"])
    assert len(cert["explore"]) == 2
    assert doc.identities["torus2"]["ok"] is True


def test_foliate_run():
    doc = run(RunConfig(command="foliate", model="builtin:heisenberg_plus_abelian"))
    payload = doc.foliation["heisenberg_plus_abelian"]
    assert payload["partition"] == {"N": [1, 2, 3], "F": [4]}
    assert payload["degeneration_index"] == 2
    assert payload["kernel_sum"]["holds_everywhere"] is True


def test_foliate_partition_out_of_range():
    cfg = RunConfig(command="foliate", model="builtin:torus2", partition=([1], [3]))
    with pytest.raises(ConfigurationError):
        run(cfg)


def test_witten_run():
    cfg = RunConfig(command="witten", witten={"grid": 8, "bands": (1, 1), "trials": 2, "refine": False})
    doc = run(cfg)
    assert doc.ok
    payload = doc.identities["witten"]
    assert payload["grid"] == 8
    assert payload["phi"][0]["k"] == [1, 0]


def test_unknown_model():
    with pytest.raises(ModelLookupError):
        load_complex("builtin:hopf")


def test_suite_on_one_model():
    cfg = RunConfig(random_metrics=1, timing=True)
    doc = run_suite(cfg, models=["builtin:torus2"], grids=False)
    assert doc.ok
    assert doc.suite["models"] == ["torus2"]
    assert doc.pages["torus2"]["degeneration_index"] == 1
    assert doc.certificates["torus2"]["fired_counts"]["GAP"] == 2
    assert "BKN1" in doc.suite["coverage"]
    assert any(key.startswith("torus2:hodge") for key in doc.timing_ms)


def test_suite_records_stage_failures(monkeypatch):
    def boom(*args, **kwargs):
        raise TheoremViolationError("kernel formula off")

    monkeypatch.setattr(runner_module, "hodge_payload", boom)
    doc = run_suite(RunConfig(random_metrics=0), models=["builtin:torus2"], grids=False)
    assert not doc.ok
    assert doc.exit_code == 2
    assert doc.failures[0].stage == "torus2:hodge[identity]"
    assert doc.pages["torus2"]["degeneration_index"] == 1
    assert doc.suite["failures"] == 1


def test_suite_runs_float_stages_above_max_exact_n():
    cfg = RunConfig(random_metrics=1, max_exact_n=2)
    doc = run_suite(cfg, models=["builtin:iwasawa"], grids=False)
    assert doc.ok, [f.as_dict() for f in doc.failures]
    pages = doc.pages["iwasawa"]
    assert pages["backend"] == "float"
    assert "backend_agreement" not in pages
    assert pages["degeneration_index"] == 2
    assert doc.hodge["iwasawa"]["iso"]["ok"] is True
    assert doc.identities["iwasawa"]["ok"] is True
    assert "fired_counts" in doc.certificates["iwasawa"]
