from __future__ import annotations

import numpy as np
import pytest

from hodgelab.errors import MetricError
from hodgelab.hodge import (
    build_hodge_package,
    build_metric,
    e2_quotient_dims,
    has_stokes_property,
    hodge_iso_e2_check,
    kernel_formula_residual,
    laplacian_quadratic_check,
    metric_classify,
)
from hodgelab.linalg import I, Backend, exact_array, hermitian_eigs
from hodgelab.models import build_double_complex, builtin_model
from hodgelab.spectral import page_table
from hodgelab.utils import child_seeds, make_rng, random_hermitian_pd


@pytest.fixture(scope="module")
def iwasawa():
    return build_double_complex(builtin_model("iwasawa"))


@pytest.fixture(scope="module")
def iwasawa_pkg(iwasawa):
    return build_hodge_package(iwasawa, build_metric(iwasawa))


def test_identity_metric_is_exact(iwasawa):
    m = build_metric(iwasawa)
    assert m.backend == Backend.EXACT
    assert m.omega[(0, 3)] == I
    assert m.omega[(2, 5)] == I
    assert len(m.omega) == 3


def test_random_metric_conventions():
    k = build_double_complex(builtin_model("kodaira_thurston"))
    m = build_metric(k, random_hermitian_pd(make_rng(5), 2))
    assert m.backend == Backend.FLOAT
    omega = k.algebra.to_vector(m.omega, 1, 1, Backend.FLOAT)
    lam_omega = m.dual_lefschetz.apply(omega, 1, 1)
    assert abs(complex(lam_omega[0]) - 2) < 1e-10


def test_metric_rejected(iwasawa):
    with pytest.raises(MetricError):
        build_metric(iwasawa, np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(MetricError):
        build_metric(iwasawa, np.eye(2))


def test_iwasawa_laplacian_spectrum(iwasawa_pkg):
    values = hermitian_eigs(iwasawa_pkg.lap_sum.block(1, 0), iwasawa_pkg.gram(1, 0)).values
    assert np.allclose(values, [0.0, 0.0, 1.0], atol=1e-10)
    assert iwasawa_pkg.kernel_basis(iwasawa_pkg.lap_tilde, 1, 0).shape[1] == 2


def test_iwasawa_hodge_isomorphism(iwasawa, iwasawa_pkg):
    report = hodge_iso_e2_check(iwasawa, iwasawa_pkg)
    assert report.ok
    e2 = page_table(iwasawa, 2)
    for entry in report.entries:
        assert entry.kernel_dim == e2.dims[entry.bidegree]
    assert report.summary["kernel_dims"]["1,0"] == 2
    assert e2_quotient_dims(iwasawa, iwasawa_pkg) == e2.dims


def test_hodge_isomorphism_for_random_metrics(iwasawa):
    e2 = page_table(iwasawa, 2)
    for seed in child_seeds(7, 3):
        m = build_metric(iwasawa, random_hermitian_pd(make_rng(seed), 3))
        pkg = build_hodge_package(iwasawa, m)
        assert hodge_iso_e2_check(iwasawa, pkg, e2=e2).ok


@pytest.mark.parametrize(
    "name", ["torus3", "iwasawa", "kodaira_thurston", "heisenberg_plus_abelian", "heisenberg_sum"]
)
def test_every_builtin_over_twenty_random_metrics(name):
    k = build_double_complex(builtin_model(name), Backend.FLOAT)
    e2 = page_table(k, 2)
    for seed in child_seeds(11, 20):
        pkg = build_hodge_package(k, build_metric(k, random_hermitian_pd(make_rng(seed), k.n)))
        report = hodge_iso_e2_check(k, pkg, e2=e2)
        assert report.ok, (name, seed, report.summary)


def test_kodaira_thurston_random_metrics_on_exact_model():
    k = build_double_complex(builtin_model("kodaira_thurston"))
    e2 = page_table(k, 2)
    for seed in range(12):
        pkg = build_hodge_package(k, build_metric(k, random_hermitian_pd(make_rng(seed), 2)))
        assert hodge_iso_e2_check(k, pkg, e2=e2).ok
        assert max(kernel_formula_residual(pkg, trials=5, seed=seed).values()) <= 1e-10


def test_kernel_formula_and_quadratic_identity(iwasawa_pkg):
    formula = kernel_formula_residual(iwasawa_pkg, trials=10, seed=1)
    quadratic = laplacian_quadratic_check(iwasawa_pkg, trials=10, seed=1)
    assert max(formula.values()) <= 1e-10
    assert max(quadratic.values()) <= 1e-10


def test_metric_classification():
    torus = build_double_complex(builtin_model("torus2"))
    flags = metric_classify(torus, build_metric(torus))
    assert flags.kahler and flags.skt

    kt = build_double_complex(builtin_model("kodaira_thurston"))
    m = build_metric(kt)
    flags = metric_classify(kt, m, build_hodge_package(kt, m))
    assert flags.skt
    assert not flags.kahler
    assert flags.as_dict()["SKT"] is True


def test_iwasawa_is_not_skt(iwasawa, iwasawa_pkg):
    flags = metric_classify(iwasawa, iwasawa_pkg.metric, iwasawa_pkg)
    assert not flags.skt
    assert flags.stokes
    assert has_stokes_property(iwasawa)


def test_rational_metric_classified_without_tolerance(iwasawa):
    # ddbar omega is 10^-11 times a nonzero form, below the float tolerance
    h = exact_array([[1, 0, 0], [0, 1, 0], [0, 0, 10**11]])
    m = build_metric(iwasawa, h)
    assert m.backend == Backend.EXACT
    flags = metric_classify(iwasawa, m)
    assert not flags.skt
    assert not flags.kahler
