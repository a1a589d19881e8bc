from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from hodgelab.errors import DimensionError, MetricError, NumericInputError, PreconditionError, SchemaError, SymmetryError
from hodgelab.linalg import (
    I,
    Backend,
    GaussianRational,
    GramForm,
    Subspace,
    det,
    exact_array,
    gr,
    gram_adjoint,
    hermitian_eigs,
    inverse,
    matmul,
    psd_domination_check,
    rank_kernel_image,
    subspace_algebra,
)
from hodgelab.models import build_double_complex, builtin_model
from hodgelab.utils import make_rng, random_complex, random_hermitian_pd


# --- scalars ---


def test_parse_gaussian_literals():
    z = gr("1/2-3/4*i")
    assert z.re == Fraction(1, 2) and z.im == Fraction(-3, 4)
    assert gr("i") == I
    assert gr("-i") == GaussianRational(0, -1)
    assert gr("2*i") == GaussianRational(0, 2)
    assert gr("-1") == -1
    assert str(z) == "1/2-3/4*i"
    assert str(gr("2*i")) == "2*i"


def test_invalid_literal_is_schema_error():
    with pytest.raises(SchemaError):
        gr("abc")
    with pytest.raises(SchemaError):
        gr("")


def test_gaussian_arithmetic():
    one_plus_i = gr(1) + I
    assert one_plus_i * one_plus_i.conjugate() == 2
    assert (one_plus_i / one_plus_i) == 1
    assert I * I == -1
    assert one_plus_i.norm2() == 2
    with pytest.raises(ZeroDivisionError):
        one_plus_i / gr(0)


# --- matrices ---


def test_exact_det_and_inverse():
    m = exact_array([[1, 2], [3, 4]])
    assert det(m) == -2
    inv = inverse(exact_array([[2, 0], [0, 3]]))
    assert inv[0, 0] == Fraction(1, 2)
    assert inv[1, 1] == Fraction(1, 3)
    assert inv[0, 1] == 0


def test_singular_exact_inverse_rejected():
    with pytest.raises(MetricError):
        inverse(exact_array([[1, 2], [2, 4]]))


def test_matmul_rejects_mixed_backends():
    with pytest.raises(DimensionError):
        matmul(exact_array([[1]]), np.eye(1))
    with pytest.raises(DimensionError):
        matmul(np.eye(2), np.eye(3))


# --- rank / kernel / image ---


def test_rank_kernel_image_zero_and_identity():
    zero = exact_array([[0, 0, 0]] * 3)
    rki = rank_kernel_image(zero)
    assert rki.rank == 0
    assert rki.kernel.dim == 3
    assert rki.image.dim == 0

    rki = rank_kernel_image(np.eye(3, dtype=complex))
    assert rki.rank == 3
    assert rki.kernel.dim == 0


def test_rank_of_iwasawa_del_block():
    k = build_double_complex(builtin_model("iwasawa"))
    rki = rank_kernel_image(k.d1.block(1, 0))
    assert rki.rank == 1
    assert rki.kernel.dim == 2


def test_nan_input_rejected():
    m = np.array([[1.0, np.nan], [0.0, 1.0]], dtype=complex)
    with pytest.raises(NumericInputError):
        rank_kernel_image(m)


# --- subspaces ---


def test_subspace_sum_and_intersection_exact():
    e1 = Subspace.span(exact_array([[1], [0], [0]]))
    e2 = Subspace.span(exact_array([[0], [1], [0]]))
    assert subspace_algebra(e1, e2, "sum").dim == 2
    assert subspace_algebra(e1, e2, "intersect").dim == 0
    assert e1.intersect(e1).equals(e1)
    assert e1.sum(e2).includes(e1)
    assert not e1.includes(e2)


def test_generic_intersection_dimension():
    rng = make_rng(0)
    u = Subspace.span(random_complex(rng, (5, 3)))
    v = Subspace.span(random_complex(rng, (5, 3)))
    assert u.intersect(v).dim == 1
    assert u.sum(v).dim == 5


def test_double_orthogonal_complement_is_identity():
    rng = make_rng(1)
    g = GramForm(random_hermitian_pd(rng, 5))
    u = Subspace.span(random_complex(rng, (5, 2)))
    perp = u.orth_complement(g)
    assert perp.dim == 3
    assert perp.orth_complement(g).equals(u)
    assert abs(complex(g.inner(u.basis[:, 0], perp.basis[:, 0]))) < 1e-10


def test_subspace_dimension_mismatch():
    a = Subspace.span(np.eye(3, dtype=complex))
    b = Subspace.span(np.eye(4, dtype=complex))
    with pytest.raises(DimensionError):
        a.sum(b)
    with pytest.raises(DimensionError):
        subspace_algebra(a, a, "orth_complement")
    with pytest.raises(ValueError):
        subspace_algebra(a, a, "difference")


# --- Gram forms ---


def test_gram_rejects_indefinite_and_non_hermitian():
    with pytest.raises(MetricError):
        GramForm(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(MetricError):
        GramForm(exact_array([[1, 1], [0, 1]]))
    assert GramForm.identity(2, Backend.EXACT).backend == Backend.EXACT


def test_gram_adjoint_defining_property():
    rng = make_rng(2)
    g_dom = GramForm(random_hermitian_pd(rng, 3))
    g_cod = GramForm(random_hermitian_pd(rng, 4))
    a = random_complex(rng, (4, 3))
    a_dag = gram_adjoint(a, g_dom, g_cod)
    u = random_complex(rng, 3)
    v = random_complex(rng, 4)
    lhs = complex(g_cod.inner(a @ u, v))
    rhs = complex(g_dom.inner(u, a_dag @ v))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
    back = gram_adjoint(a_dag, g_cod, g_dom)
    assert np.allclose(back, a, atol=1e-10)


def test_gram_adjoint_identity_is_conjugate_transpose():
    a = np.array([[1.0, 2j], [0.0, 3.0]])
    g = GramForm.identity(2)
    assert np.allclose(gram_adjoint(a, g, g), a.conj().T)


def test_hermitian_eigs():
    g = GramForm.identity(2)
    eig = hermitian_eigs(np.diag([2.0, 1.0]).astype(complex), g)
    assert np.allclose(eig.values, [1.0, 2.0])
    with pytest.raises(SymmetryError):
        hermitian_eigs(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex), g)


def test_hermitian_eigs_accepts_roundoff_zero_block():
    rng = make_rng(7)
    x = random_complex(rng, (2, 2))
    g = GramForm(x @ x.conj().T + 2 * np.eye(2))
    eig = hermitian_eigs(1e-17 * random_complex(rng, (2, 2)), g)
    assert np.allclose(eig.values, 0.0, atol=1e-14)
    with pytest.raises(SymmetryError):
        hermitian_eigs(1e-3 * np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex), GramForm.identity(2))


def test_psd_domination():
    g = GramForm.identity(3)
    ident = np.eye(3, dtype=complex)
    zero = np.zeros((3, 3), dtype=complex)
    assert psd_domination_check(ident, zero, g)
    assert not psd_domination_check(zero, ident, g)
    rng = make_rng(3)
    x = random_complex(rng, (3, 3))
    a = x @ x.conj().T
    assert psd_domination_check(a, 0.5 * a, g)
    with pytest.raises(PreconditionError):
        psd_domination_check(-ident, zero, g)
