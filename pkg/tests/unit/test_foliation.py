from __future__ import annotations

from math import comb

import numpy as np
import pytest

from hodgelab.errors import ProductMetricError
from hodgelab.foliation import (
    anticommutator_norm,
    build_foliated_package,
    holomorphic_cohomology,
    kernel_sum_hypothesis,
    nf_hodge_iso_check,
    nf_implication_chain_check,
    nf_pages_and_degeneration,
    nf_soundness,
    product_metric,
    total_block,
)
from hodgelab.models import build_double_complex, builtin_model, foliated_split
from hodgelab.operators import commutator
from hodgelab.utils import make_rng, random_hermitian_pd

H3 = [1, 2, 2, 1]


def _split(name):
    eq = builtin_model(name)
    k = build_double_complex(eq)
    return foliated_split(k, *eq.foliation)


@pytest.fixture(scope="module")
def plus_abelian():
    fk = _split("heisenberg_plus_abelian")
    return fk, build_foliated_package(fk)


@pytest.fixture(scope="module")
def heisenberg_sum():
    fk = _split("heisenberg_sum")
    return fk, build_foliated_package(fk)


def test_kernel_sum_holds_with_zero_epsilon(plus_abelian):
    fk, fpkg = plus_abelian
    report = kernel_sum_hypothesis(fk, fpkg)
    assert report.holds_everywhere
    assert report.epsilon == pytest.approx(0.0, abs=1e-12)
    assert report.quadratic_bound is True
    assert report.summary["holds_everywhere"] is True


def test_plus_abelian_pages_and_iso(plus_abelian):
    fk, fpkg = plus_abelian
    pages = nf_pages_and_degeneration(fk, fpkg, max_page=3)
    assert pages.degeneration_index == 2
    e2 = pages.pages[2]
    for (p, q), d in e2.dims.items():
        assert d == H3[p] * comb(1, q)
    assert pages.holomorphic_cohomology == [1, 3, 4, 3, 1]

    hypothesis = kernel_sum_hypothesis(fk, fpkg)
    iso = nf_hodge_iso_check(fk, fpkg, hypothesis, e2=e2)
    assert iso.applicable
    assert iso.ok
    for entry in iso.entries:
        assert entry.kernel_dim == e2.dims[entry.bidegree]
    nf_soundness(fk, iso, pages)


def test_plus_abelian_implications(plus_abelian):
    fk, fpkg = plus_abelian
    chain = nf_implication_chain_check(fk, fpkg)
    assert chain.anticommute
    assert chain.commutes_with_projector
    assert chain.kernel_inclusion
    assert chain.kernel_equality
    assert chain.as_dict()["quadratic_split"] is True


def test_heisenberg_sum_commuting_factors(heisenberg_sum):
    fk, fpkg = heisenberg_sum
    assert anticommutator_norm(fpkg) == 0.0
    report = kernel_sum_hypothesis(fk, fpkg)
    assert not report.holds_everywhere


def test_heisenberg_sum_pages(heisenberg_sum):
    fk, fpkg = heisenberg_sum
    pages = nf_pages_and_degeneration(fk, fpkg, max_page=3)
    assert pages.degeneration_index == 2
    assert pages.pages[2].dims[(1, 1)] == 4
    expected = [sum(H3[a] * H3[j - a] for a in range(4) if 0 <= j - a <= 3) for j in range(7)]
    assert pages.holomorphic_cohomology == expected
    assert holomorphic_cohomology(fk) == expected

    chain = nf_implication_chain_check(fk, fpkg)
    assert chain.anticommute
    assert chain.kernel_inclusion


def test_product_metric_rejects_coupling(plus_abelian):
    fk, _ = plus_abelian
    h = np.eye(4, dtype=complex)
    h[0, 3] = h[3, 0] = 0.1
    with pytest.raises(ProductMetricError):
        product_metric(fk, h)
    with pytest.raises(ProductMetricError):
        product_metric(fk, np.eye(3))


def test_product_metric_package(plus_abelian):
    fk, _ = plus_abelian
    h = np.diag([1.0, 2.0, 1.5, 3.0]).astype(complex)
    fpkg = build_foliated_package(fk, product_metric(fk, h))
    assert kernel_sum_hypothesis(fk, fpkg).holds_everywhere
    assert (0, 4) in fpkg.metric.omega_n
    assert (0, 7) not in fpkg.metric.omega_n
    assert (3, 7) in fpkg.metric.omega_f


def test_laplacian_splits_in_total_degree(plus_abelian):
    fk, fpkg = plus_abelian
    terms = (
        fpkg.lap_n,
        fpkg.lap_f,
        commutator(fpkg.del_n, fpkg.del_f_star),
        commutator(fpkg.del_f, fpkg.del_n_star),
    )
    for k in range(fk.n + 1):
        rhs = sum(total_block(fk, term, k) for term in terms)
        assert np.allclose(fpkg.lap_del[k], rhs, atol=1e-12)


def test_package_for_random_product_metric(plus_abelian):
    fk, _ = plus_abelian
    h = np.zeros((4, 4), dtype=complex)
    h[:3, :3] = random_hermitian_pd(make_rng(2), 3)
    h[3, 3] = 2.0
    fpkg = build_foliated_package(fk, product_metric(fk, h))
    assert fpkg.metric.backend.value == "float"
    assert kernel_sum_hypothesis(fk, fpkg).holds_everywhere
