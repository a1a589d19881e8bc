from __future__ import annotations

from math import comb

import pytest

from hodgelab.models import build_double_complex, builtin_model
from hodgelab.spectral import (
    backend_agreement,
    boundary_space,
    degeneration_index,
    e2_cross_check,
    page_table,
    total_cohomology,
    zigzag_space,
)


@pytest.fixture(scope="module")
def iwasawa():
    return build_double_complex(builtin_model("iwasawa"))


def test_torus_degenerates_at_e1():
    k = build_double_complex(builtin_model("torus3"))
    e1 = page_table(k, 1)
    for (p, q), d in e1.dims.items():
        assert d == comb(3, p) * comb(3, q)
    conv = degeneration_index(k)
    assert conv.degeneration_index == 1
    assert conv.betti == [comb(6, j) for j in range(7)]


def test_iwasawa_pages(iwasawa):
    conv = degeneration_index(iwasawa, max_page=3)
    assert conv.degeneration_index == 2
    assert conv.betti == [1, 4, 8, 10, 8, 4, 1]
    assert conv.page(1).dims[(1, 0)] == 3
    e2 = conv.page(2)
    assert e2.dims[(1, 0)] == 2
    assert e2.dims[(0, 1)] == 2
    for deg, b in enumerate(conv.betti):
        assert e2.total(deg) == b
    assert conv.page(3).dims == e2.dims
    assert e2.dims_by_key()["1,0"] == 2


def test_iwasawa_zigzags(iwasawa):
    assert zigzag_space(iwasawa, 1, 0, 2).dim == 2
    assert boundary_space(iwasawa, 2, 0, 2).dim == 1


def test_iwasawa_e2_cross_check(iwasawa):
    for p, q in iwasawa.components():
        check = e2_cross_check(iwasawa, p, q)
        assert check.ok, (p, q)


def test_kodaira_thurston_degenerates_at_e1():
    k = build_double_complex(builtin_model("kodaira_thurston"))
    conv = degeneration_index(k)
    assert conv.degeneration_index == 1
    assert conv.betti == [1, 3, 4, 3, 1]


def test_float_backend_matches_exact(iwasawa):
    tables = backend_agreement(iwasawa, max_page=2)
    assert tables[2].dims[(1, 0)] == 2
    conv = degeneration_index(iwasawa.to_float())
    assert conv.degeneration_index == 2
    assert total_cohomology(iwasawa.to_float()) == [1, 4, 8, 10, 8, 4, 1]
