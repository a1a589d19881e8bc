from __future__ import annotations

import numpy as np
import pytest

from hodgelab.errors import DimensionError
from hodgelab.linalg import Backend, GramForm, exact_array
from hodgelab.models import build_double_complex, builtin_model
from hodgelab.operators import BigradedOperator, commutator, relative_residual

DIMS = {(0, 0): 1, (1, 0): 2, (0, 1): 2, (1, 1): 4}


def test_block_shape_is_checked():
    with pytest.raises(DimensionError):
        BigradedOperator((1, 0), DIMS, {(0, 0): exact_array([[1]])})
    with pytest.raises(DimensionError):
        BigradedOperator((1, 0), DIMS, {(5, 5): exact_array([[1]])})


def test_missing_blocks_are_zero():
    op = BigradedOperator.zero((1, 0), DIMS, Backend.EXACT)
    assert op.block(0, 0).shape == (2, 1)
    assert op.block(1, 0).shape == (0, 2)
    assert op.is_zero()


def test_composition_adds_bidegrees():
    a = BigradedOperator((1, 0), DIMS, {(0, 0): exact_array([[1], [2]])})
    b = BigradedOperator((0, 1), DIMS, {(1, 0): exact_array([[1, 0], [0, 1], [0, 0], [1, 1]])})
    c = b @ a
    assert c.bidegree == (1, 1)
    assert [x for x in c.block(0, 0).flat] == [1, 2, 0, 3]


def test_float_exact_mix_promotes_to_float():
    a = BigradedOperator.identity(DIMS, Backend.EXACT)
    b = BigradedOperator.identity(DIMS, Backend.FLOAT) * 0.5
    assert (a + b).backend == Backend.FLOAT
    assert np.allclose((a + b).block(1, 1), 1.5 * np.eye(4))


def test_del_and_dbar_anticommute():
    k = build_double_complex(builtin_model("kodaira_thurston"))
    assert commutator(k.d1, k.d2).is_zero()
    assert commutator(k.d1, k.d1).is_zero()
    assert relative_residual(k.d1 @ k.d2, -(k.d2 @ k.d1)) == 0.0


def test_adjoint_with_identity_grams_is_conjugate_transpose():
    k = build_double_complex(builtin_model("iwasawa"))
    grams = {key: GramForm.identity(d, Backend.EXACT) for key, d in k.dims.items()}
    star = k.d1.adjoint(grams)
    assert star.bidegree == (-1, 0)
    assert star.backend == Backend.EXACT
    m = k.d1.block(1, 0)
    assert all(a == b.conjugate() for a, b in zip(star.block(2, 0).flat, m.T.flat))
