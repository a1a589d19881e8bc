from __future__ import annotations

from math import comb

import pytest

from hodgelab.errors import IntegrabilityError, ModelLookupError, SchemaError
from hodgelab.linalg import is_zero
from hodgelab.models import (
    ExteriorAlgebra,
    build_double_complex,
    builtin_model,
    foliated_split,
    load_structure_equations,
    parse_structure_equations,
    resolve_model,
    wedge,
)

IWASAWA_TOML = """
[model]
n = 3
generators = ["w1", "w2", "w3"]

[d]
w3 = [{coeff = "-1", wedge = ["w1", "w2"]}]
"""

KT_TOML = """
[model]
n = 2

[d]
w2 = [{coeff = "1", wedge = ["w1", "w1bar"]}]

[metric]
g = [["2", "i"], ["-i", "1"]]
"""


def test_parse_iwasawa_file():
    eq = parse_structure_equations(IWASAWA_TOML, label="iwasawa")
    assert eq.n == 3
    assert eq.names == ("w1", "w2", "w3")
    assert eq.d20[2][(0, 1)] == -1
    assert eq.coefficient_count() == 1


def test_parse_mixed_term_and_metric():
    eq = parse_structure_equations(KT_TOML)
    assert eq.d11[1][(0, 0)] == 1
    assert eq.metric.shape == (2, 2)
    assert str(eq.metric[0, 1]) == "i"


def test_reversed_wedge_flips_sign():
    text = IWASAWA_TOML.replace('["w1", "w2"]', '["w2", "w1"]')
    eq = parse_structure_equations(text)
    assert eq.d20[2][(0, 1)] == 1


@pytest.mark.parametrize(
    "body",
    [
        'w3 = [{coeff = "1", wedge = ["w1bar", "w2bar"]}]',
        'w3 = [{coeff = 1.5, wedge = ["w1", "w2"]}]',
        'w3 = [{coeff = "1", wedge = ["w1", "w7"]}]',
        'w3 = [{coeff = "1", wedge = ["w1", "w2"]}, {coeff = "2", wedge = ["w1", "w2"]}]',
        'w3 = [{coeff = "x", wedge = ["w1", "w2"]}]',
    ],
)
def test_schema_errors(body):
    text = '[model]\nn = 3\n\n[d]\n' + body + "\n"
    with pytest.raises(SchemaError):
        parse_structure_equations(text)


def test_invalid_toml():
    with pytest.raises(SchemaError):
        parse_structure_equations("[model\nn = 3")


def test_load_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        load_structure_equations(tmp_path / "nope.toml")


def test_resolve_model_file(tmp_path):
    path = tmp_path / "iwasawa.toml"
    path.write_text(IWASAWA_TOML, encoding="utf-8")
    eq = resolve_model(str(path))
    assert eq.d20[2][(0, 1)] == -1


def test_builtin_models():
    assert builtin_model("iwasawa").d20 == {2: {(0, 1): -1}}
    assert builtin_model("kodaira_thurston").d11 == {1: {(0, 0): 1}}
    torus = builtin_model("builtin:torus(4)")
    assert torus.n == 4 and torus.coefficient_count() == 0
    assert builtin_model("torus3").label == "torus3"
    assert builtin_model("heisenberg_sum").foliation == ((0, 1, 2), (3, 4, 5))
    assert builtin_model("heisenberg_plus_abelian").foliation == ((0, 1, 2), (3,))
    with pytest.raises(ModelLookupError):
        builtin_model("hopf")


def test_wedge_is_graded_commutative():
    assert wedge({(0,): 1}, {(1,): 1}) == {(0, 1): 1}
    assert wedge({(1,): 1}, {(0,): 1}) == {(0, 1): -1}
    assert wedge({(0,): 1}, {(0,): 1}) == {}


def test_exterior_algebra_dims():
    dims = ExteriorAlgebra(3).dims()
    for (p, q), d in dims.items():
        assert d == comb(3, p) * comb(3, q)
    assert sum(dims.values()) == 2**6


def test_iwasawa_double_complex():
    k = build_double_complex(builtin_model("iwasawa"))
    alg = k.algebra
    block = k.d1.block(1, 0)
    row = alg.index(2, 0)[(0, 1)]
    col = alg.index(1, 0)[(2,)]
    assert block[row, col] == -1
    assert sum(1 for x in block.flat if x) == 1
    assert is_zero(k.d2.block(1, 0))
    assert k.has_conjugation_symmetry()


def test_kodaira_thurston_dbar_is_nonzero():
    k = build_double_complex(builtin_model("kodaira_thurston"))
    assert not is_zero(k.d2.block(1, 0))
    assert k.has_conjugation_symmetry()


def test_jacobi_violation_rejected():
    text = """
[model]
n = 4

[d]
w4 = [{coeff = "1", wedge = ["w1", "w2"]}]
w1 = [{coeff = "1", wedge = ["w3", "w4"]}]
"""
    eq = parse_structure_equations(text, label="broken")
    with pytest.raises(IntegrabilityError):
        build_double_complex(eq)


def test_foliated_split_heisenberg_plus_abelian():
    eq = builtin_model("heisenberg_plus_abelian")
    k = build_double_complex(eq)
    fk = foliated_split(k, *eq.foliation)
    assert fk.dims[(3, 1)] == 1
    assert fk.dims[(1, 0)] == 3
    assert fk.dims[(0, 1)] == 1
    assert sum(fk.dims.values()) == 2**4
    assert fk.rank == 3
    # del_F vanishes: F is an abelian ideal with no structure constants
    assert fk.d2.is_zero()


@pytest.mark.parametrize("n_idx,f_idx", [((2,), (0, 1)), ((0, 1), (2,))])
def test_foliated_split_requires_integrability(n_idx, f_idx):
    k = build_double_complex(builtin_model("iwasawa"))
    with pytest.raises(IntegrabilityError):
        foliated_split(k, n_idx, f_idx)
