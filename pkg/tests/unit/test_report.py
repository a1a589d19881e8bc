from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from hodgelab.config import RunConfig
from hodgelab.errors import InputError
from hodgelab.linalg import GaussianRational
from hodgelab.report import coverage_matrix, emit_report, format_scalar, render_html, render_text, serialize
from hodgelab.runner import Failure, ReportDocument


def _dummy_doc() -> ReportDocument:
    doc = ReportDocument(config=RunConfig(command="pages", model="builtin:iwasawa"))
    doc.pages["iwasawa"] = {
        "model": "iwasawa",
        "degeneration_index": 2,
        "betti": [1, 4, 8, 10, 8, 4, 1],
        "dims": {"E1": {"1,0": 3}, "E2": {"1,0": 2}},
    }
    return doc


def test_format_scalar():
    assert format_scalar(True) is True
    assert format_scalar(np.int64(3)) == 3
    assert format_scalar(Fraction(1, 3)) == "1/3"
    assert format_scalar(GaussianRational(Fraction(1, 2), Fraction(0))) == str(GaussianRational(Fraction(1, 2), Fraction(0)))
    assert format_scalar(0.1) == "0.1"
    assert format_scalar(-0.0) == "0"
    assert format_scalar(float("inf")) == "inf"
    assert format_scalar(2 + 0j) == "2"
    assert format_scalar(-1.5j) == "-1.5*i"
    assert format_scalar(1 - 2j) == "1-2*i"
    assert format_scalar(1 + 2j) == "1+2*i"
    assert format_scalar("text") == "text"


def test_serialize_nested():
    out = serialize({(1, 0): np.array([1.0, 2.5]), "flags": (True, None)})
    assert out == {"(1, 0)": ["1", "2.5"], "flags": [True, None]}


def test_coverage_matrix_drops_untouched_rows():
    df = coverage_matrix({"iwasawa": {"BKN1": "pass"}, "torus3": {"BKN1": "pass", "COMM1": "reported"}}, ["BKN1", "COMM1", "WL1"])
    assert list(df.index) == ["BKN1", "COMM1"]
    assert df.loc["COMM1", "iwasawa"] == "-"
    assert coverage_matrix({}, ["BKN1"]).empty


def test_render_text_contains_key_info():
    doc = _dummy_doc()
    doc.failures.append(Failure("hodge", "kernel formula off", 2))
    txt = render_text(doc)
    assert txt.startswith("OK: False")
    assert "iwasawa: degenerates at E_2" in txt
    assert "FAIL hodge: kernel formula off" in txt


def test_emit_report(tmp_path):
    doc = _dummy_doc()
    path = tmp_path / "report.json"
    s = emit_report(doc, str(path))
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data == json.loads(s)
    assert data["schema_version"] == 1
    assert data["pages"]["iwasawa"]["betti"][3] == 10
    assert data["config"]["model"] == "builtin:iwasawa"
    with pytest.raises(InputError):
        emit_report(doc, str(tmp_path))


def test_render_html_contains_sections(tmp_path):
    doc = _dummy_doc()
    doc.failures.append(Failure("pages", "<b>bad</b>", 2))
    html_path = tmp_path / "report.html"
    html = render_html(doc, json_href="report.json", path=str(html_path))
    assert html_path.exists()
    assert "hodgelab" in html
    assert "Betti numbers" in html
    assert "report.json" in html
    assert "Failures" in html
    assert "<b>bad</b>" not in html
