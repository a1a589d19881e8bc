from __future__ import annotations

import numpy as np
import pytest

from hodgelab.errors import PreconditionError, ProductMetricError
from hodgelab.grid import FOLIATION_IDENTITY_IDS, MetricSpec, build_grid, bundle_like_metric, foliation_grid_suite

EXACT_FOR_ANY_METRIC = ("DZ", "XIC", "LNF", "FDB")


def test_constant_product_metric():
    grid = build_grid(2, 8, MetricSpec.constant(np.diag([1.0, 2.0])), bands=(1, 1))
    report = foliation_grid_suite(grid, 1, trials=2, refine=False)
    assert report.ok, report.summary
    assert [r.identity for r in report.results] == list(FOLIATION_IDENTITY_IDS)
    assert all(r.exact for r in report.results)
    assert report.structure.bundle_like
    assert report.summary["structure"]["product"] is True


def test_bundle_like_metric_exact_lemmas():
    grid = build_grid(2, 8, bundle_like_metric(2, 1), bands=(1, 1))
    report = foliation_grid_suite(grid, 1, trials=2, refine=False)
    for ident in EXACT_FOR_ANY_METRIC:
        assert report.result(ident).exact
        assert report.residual(ident) <= 1e-10
    assert not report.result("NFC").exact
    assert report.checks["control_LNF_nonvanishing"]
    assert report.checks["control_ANC_nonvanishing"]
    assert set(report.control) == {"LNF", "ANC"}


def test_non_bundle_like_metric_is_reported_only():
    grid = build_grid(2, 8, bundle_like_metric(2, 1, control=True), bands=(1, 1))
    report = foliation_grid_suite(grid, 1, trials=1, refine=False, control=False)
    assert not report.structure.bundle_like
    assert not report.result("LNF").asserted
    assert report.result("LNF").ok


def test_foliation_suite_rejects_coupled_metric():
    grid = build_grid(2, 8, MetricSpec.constant(np.array([[1.0, 0.1], [0.1, 1.0]])), bands=(1, 1))
    with pytest.raises(ProductMetricError):
        foliation_grid_suite(grid, 1, trials=1)
    with pytest.raises(PreconditionError):
        foliation_grid_suite(grid, 1, trials=0)


def test_bundle_like_metric_spectral_lemmas_refine():
    grid = build_grid(2, 16, bundle_like_metric(2, 1))
    report = foliation_grid_suite(grid, 1, trials=1, control=False, bidegrees=[(1, 1)])
    assert report.ok, report.summary
    for ident in ("NFC", "ANC"):
        result = report.result(ident)
        assert not result.exact and result.asserted
        assert result.residual <= 1e-6
        assert result.refined_residual is not None
        assert result.refinement_ok
