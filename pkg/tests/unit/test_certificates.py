from __future__ import annotations

import math

import pytest

from hodgelab.certificates import (
    IDENTITY_IDS,
    certify_e1,
    certify_e2,
    gap_and_bound,
    identity_suite,
    metric_search,
    sharp_gap_analysis,
    torsion_operators,
)
from hodgelab.errors import PreconditionError
from hodgelab.hodge import build_hodge_package, build_metric, metric_classify
from hodgelab.linalg import psd_domination_check, to_float
from hodgelab.models import build_double_complex, builtin_model
from hodgelab.utils import child_seeds, make_rng, random_hermitian_pd


def _package(name, h=None):
    k = build_double_complex(builtin_model(name))
    pkg = build_hodge_package(k, build_metric(k, h))
    return k, pkg, torsion_operators(k, pkg)


@pytest.fixture(scope="module")
def iwasawa():
    return _package("iwasawa")


def _by_name(reports):
    return {r.name: r for r in reports}


def test_identity_suite_exact_on_iwasawa(iwasawa):
    k, pkg, tp = iwasawa
    report = identity_suite(k, pkg, tp, trials=2, seed=0)
    assert report.ok, report.summary["failing"]
    assert report.asserted
    assert set(report.results) == set(IDENTITY_IDS)
    assert report.residual("BKN2") <= 1e-12
    assert report.residual("COMM1") <= 1e-12


def test_identity_suite_random_metrics_on_kodaira_thurston():
    for seed in child_seeds(11, 3):
        k, pkg, tp = _package("kodaira_thurston", random_hermitian_pd(make_rng(seed), 2))
        report = identity_suite(k, pkg, tp, trials=3, seed=seed, tol=1e-10)
        assert report.ok, report.summary["failing"]


def test_identity_suite_needs_trials(iwasawa):
    k, pkg, tp = iwasawa
    with pytest.raises(PreconditionError):
        identity_suite(k, pkg, tp, trials=0)


def test_gap_and_bound_iwasawa(iwasawa):
    k, pkg, tp = iwasawa
    gap = gap_and_bound(k, pkg, tp, 1, 0)
    assert gap.rho == pytest.approx(1.0)
    assert gap.lambda0 == pytest.approx(1.0)
    assert gap.c >= 0.0
    assert set(gap.as_dict()) == {"rho", "C", "lambda0", "mu0"}
    with pytest.raises(PreconditionError):
        gap_and_bound(k, pkg, tp, 4, 0)


def test_iwasawa_certificates(iwasawa):
    k, pkg, tp = iwasawa
    flags = metric_classify(k, pkg.metric, pkg)
    e2 = _by_name(certify_e2(k, pkg, tp, flags=flags, index=2))
    assert set(e2) == {"GAP", "COMMUTE", "RBAR", "KERINC"}
    assert not e2["GAP"].applicable
    assert not e2["GAP"].fired
    assert all(r.cross_check == 2 for r in e2.values())

    e1 = _by_name(certify_e1(k, pkg, tp, flags=flags, index=2))
    assert set(e1) == {"R0", "DOMINATION"}
    assert not e1["DOMINATION"].verdict
    assert not e1["DOMINATION"].fired
    assert e1["DOMINATION"].target_page == 1


def test_torus_gap_fires():
    k, pkg, tp = _package("torus3")
    gap = gap_and_bound(k, pkg, tp, 1, 1)
    assert math.isinf(gap.rho)
    e2 = _by_name(certify_e2(k, pkg, tp))
    assert e2["GAP"].fired
    assert e2["GAP"].cross_check == 1
    assert e2["GAP"].to_dict()["fired"] is True


def test_sharp_gap_on_kodaira_thurston():
    k, pkg, tp = _package("kodaira_thurston")
    report = sharp_gap_analysis(k, pkg, tp)
    assert report.applicable
    assert report.ok
    assert "epsilon" in report.summary


def test_metric_search_on_torus():
    k = build_double_complex(builtin_model("torus2"))
    hits = metric_search(k, samples=2, seed=3, index=1)
    assert len(hits) == 2
    assert all(h.skt for h in hits)
    assert all("GAP" in h.fired for h in hits)


def test_sharp_gap_statements_agree_over_random_skt_metrics():
    k = build_double_complex(builtin_model("kodaira_thurston"))
    for seed in child_seeds(5, 20):
        metric = build_metric(k, random_hermitian_pd(make_rng(seed), 2))
        pkg = build_hodge_package(k, metric)
        tp = torsion_operators(k, pkg)
        flags = metric_classify(k, metric, pkg)
        assert flags.skt
        report = sharp_gap_analysis(k, pkg, tp, flags)
        assert report.applicable and report.ok, report.summary
        for entry in report.entries:
            assert entry.statements_agree
            if entry.domination is None:
                continue
            p, q = entry.bidegree
            eps = max(
                (e.epsilon for e in report.entries if e.bidegree in ((p - 1, q), (p + 1, q))), default=0.0
            )
            assert psd_domination_check(
                pkg.lap_del_pperp.block(p, q),
                (1.0 - eps) * to_float(pkg.lap_del.block(p, q)),
                pkg.gram(p, q),
                tol=1e-9,
            )
