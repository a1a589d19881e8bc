from __future__ import annotations

import numpy as np
import pytest

from hodgelab.errors import AliasingRiskError, DimensionError, MetricError, PreconditionError
from hodgelab.grid import MetricSpec, MetricTerm, band_budget, build_grid, bundle_like_metric, metric_structure
from hodgelab.grid.operators import adjoint_defect, commutator, dbar_op, del_op, metric_adjoint, metric_operators
from hodgelab.utils import make_rng


def test_band_budget():
    assert band_budget(2, 1) == 9
    assert band_budget(1, 1) == 7
    with pytest.raises(AliasingRiskError):
        build_grid(1, 8, bands=(2, 1))
    with pytest.raises(AliasingRiskError):
        build_grid(1, 8, MetricSpec(np.eye(1), (MetricTerm(0.1 * np.eye(1), (2, 0)),), "band-limited"), bands=(1, 1))


def test_metric_validation():
    with pytest.raises(MetricError):
        MetricSpec(np.eye(1), (MetricTerm(0.1 * np.eye(1), (1, 0)),), "constant")
    with pytest.raises(MetricError):
        MetricSpec(np.eye(2), kind="diagonal")
    with pytest.raises(MetricError):
        MetricSpec(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(DimensionError):
        build_grid(2, 8, MetricSpec.constant(n=1), bands=(1, 1))


def test_metric_must_stay_positive():
    spec = MetricSpec(np.eye(1), (MetricTerm(2.0 * np.eye(1), (1, 0)),), "inverse-band-limited")
    with pytest.raises(MetricError):
        build_grid(1, 8, spec, bands=(1, 1))


def test_flat_grid_shapes():
    grid = build_grid(1, 8, bands=(1, 1))
    assert grid.shape == (8, 8)
    assert grid.points == 64
    assert grid.dims[(1, 1)] == 64
    assert np.allclose(grid.h(0, 0), 1.0)
    u = grid.random_form(make_rng(0), 1, 0)
    assert set(u) == {(0,)}
    back = grid.from_vector(grid.to_vector(u, 1, 0), 1, 0)
    assert np.allclose(back[(0,)], u[(0,)])


def test_derivatives_of_a_plane_wave():
    grid = build_grid(1, 8, bands=(1, 1))
    x, y = grid.coords
    f = np.exp(1j * (x + 0 * y))
    assert np.allclose(grid.d_dz(f, 0), 0.5j * f)
    assert np.allclose(grid.d_dzbar(f, 0), 0.5j * f)
    g = np.exp(1j * (0 * x + y))
    assert np.allclose(grid.d_dz(g, 0), 0.5 * g)
    assert np.allclose(grid.d_dzbar(g, 0), -0.5 * g)


def test_lefschetz_commutator_on_flat_grid():
    grid = build_grid(1, 8, bands=(1, 1))
    ops = metric_operators(grid)
    bracket = commutator(ops.lefschetz, ops.dual_lefschetz)
    u = grid.random_form(make_rng(1), 0, 0)
    out = bracket(u)
    assert np.allclose(out[()], -u[()])
    v = grid.random_form(make_rng(2), 1, 1)
    out = bracket(v)
    assert np.allclose(out[(0, 1)], v[(0, 1)])


def test_metric_adjoint_is_exact_for_variable_metric():
    spec = MetricSpec(np.eye(1), (MetricTerm(0.3 * np.eye(1), (1, 0)),), "band-limited")
    grid = build_grid(1, 16, spec)
    rng = make_rng(4)
    u, v = grid.random_form(rng, 0, 0), grid.random_form(rng, 1, 0)
    d = del_op(grid)
    assert adjoint_defect(grid, d, metric_adjoint(grid, d), u, v) <= 1e-10
    w = grid.random_form(rng, 0, 1)
    db = dbar_op(grid)
    assert adjoint_defect(grid, db, metric_adjoint(grid, db), u, w) <= 1e-10


def test_bundle_like_structure():
    spec = bundle_like_metric(2, 1)
    structure = metric_structure(spec, 1)
    assert structure.product
    assert structure.bundle_like
    assert structure.kahler_n
    control = metric_structure(bundle_like_metric(2, 1, control=True), 1)
    assert control.product
    assert not control.bundle_like
    with pytest.raises(PreconditionError):
        bundle_like_metric(2, 2)
    with pytest.raises(PreconditionError):
        metric_structure(spec, 0)
