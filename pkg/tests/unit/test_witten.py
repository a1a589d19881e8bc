from __future__ import annotations

import numpy as np
import pytest

from hodgelab.errors import AliasingRiskError, InputError, PreconditionError
from hodgelab.grid import (
    WITTEN_IDENTITY_IDS,
    MetricSpec,
    MetricTerm,
    build_grid,
    parse_phi,
    witten_data,
    witten_hodge_decomposition_check,
    witten_identity_suite,
)


def test_parse_phi():
    terms = parse_phi("cos(x1)+0.5*sin(y1)", 1)
    assert [t.k for t in terms] == [(1, 0), (0, 1)]
    assert terms[0].c == 1
    assert terms[1].c == -0.5j

    (term,) = parse_phi("-2*cos(x1-2*y1)", 1)
    assert term.k == (1, -2)
    assert term.c == -2

    (term,) = parse_phi("sin(x2)", 2)
    assert term.k == (0, 0, 1, 0)
    assert parse_phi("", 1) == ()
    assert parse_phi("   ", 2) == ()


@pytest.mark.parametrize("text", ["cos(x3)", "tan(x1)", "cos(z1)", "cos(x1)*sin(y1)"])
def test_parse_phi_rejects(text):
    with pytest.raises(InputError):
        parse_phi(text, 1)


def test_weight_band_is_checked():
    grid = build_grid(1, 16)
    with pytest.raises(AliasingRiskError):
        witten_data(grid, parse_phi("cos(3*x1)", 1))


def test_witten_data_on_variable_metric():
    spec = MetricSpec(np.eye(1), (MetricTerm(0.2 * np.eye(1), (0, 1)),), "band-limited")
    grid = build_grid(1, 16, spec)
    data = witten_data(grid, parse_phi("cos(x1)+0.5*sin(y1)", 1))
    assert data.defining_residual <= 1e-12
    assert data.index_residual <= 1e-10
    assert data.pairing_residual <= 1e-12
    assert np.all(data.norm_sq >= -1e-12)
    assert np.allclose(data.phi, np.cos(grid.coords[0]) + 0.5 * np.sin(grid.coords[1]))


def test_witten_suite_flat_one_dimensional():
    grid = build_grid(1, 16)
    report = witten_identity_suite(grid, parse_phi("cos(x1)", 1), trials=5, seed=3, refine=False)
    assert report.ok, report.summary
    assert [r.identity for r in report.results] == list(WITTEN_IDENTITY_IDS)
    assert all(r.exact for r in report.results)
    assert report.residual("WBKN2") <= 1e-10
    assert report.checks["adjoint_exact"]
    assert report.summary["grid"] == 16


def test_witten_suite_without_weight():
    grid = build_grid(1, 16)
    report = witten_identity_suite(grid, (), trials=3, refine=False)
    assert report.ok
    assert report.residual("WL1") <= 1e-10


def test_witten_suite_two_dimensional():
    grid = build_grid(2, 8, bands=(1, 1))
    report = witten_identity_suite(grid, parse_phi("cos(x1)+sin(y2)", 2), trials=2, refine=False)
    assert report.ok, report.summary
    assert report.residual("CDL") <= 1e-10


def test_witten_suite_needs_trials():
    with pytest.raises(PreconditionError):
        witten_identity_suite(build_grid(1, 16), (), trials=0)


def test_witten_decomposition_expanded_operators():
    grid = build_grid(1, 8, bands=(1, 1))
    report = witten_hodge_decomposition_check(grid, parse_phi("cos(x1)", 1))
    assert report.ok
    assert report.kernel_dims("dbar_phi") == {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1}
    assert "realization" not in report.summary
    assert len(report.summary["entries"]) == 8


def test_witten_suite_variable_metric_refines():
    spec = MetricSpec(np.eye(1), (MetricTerm(0.05 * np.eye(1), (0, 1)),), "band-limited")
    grid = build_grid(1, 16, spec)
    report = witten_identity_suite(grid, parse_phi("cos(x1)", 1), trials=3, seed=2)
    assert report.ok, report.summary
    spectral = [r for r in report.results if not r.exact]
    assert spectral
    for r in spectral:
        assert r.residual <= 1e-6
        assert r.refined_residual is not None
        assert r.refinement_ok


def test_witten_decomposition_preconditions():
    with pytest.raises(PreconditionError):
        witten_hodge_decomposition_check(build_grid(2, 8, bands=(1, 1)), ())
    with pytest.raises(PreconditionError):
        witten_hodge_decomposition_check(build_grid(1, 16), ())
