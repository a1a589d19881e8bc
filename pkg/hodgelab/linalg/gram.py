"""Gram forms, metric adjoints and Hermitian eigensolves.

Every inner product in hodgelab is ``<u, v> = v* G u`` for a Hermitian
positive-definite Gram matrix ``G`` attached to one bigraded component.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import linalg

from ..errors import DimensionError, MetricError, PreconditionError, SymmetryError
from .matrices import backend_of, check_finite, hconj, inverse, matmul, to_float
from .scalars import Backend


def _exact_positive_definite(g: np.ndarray) -> bool:
    """LDL* elimination without pivoting; every pivot must be real and positive."""
    rows = [list(r) for r in g]
    n = len(rows)
    for k in range(n):
        piv = rows[k][k]
        if piv.im != 0 or piv.re <= 0:
            return False
        for r in range(k + 1, n):
            f = rows[r][k]
            if f:
                f = f / piv
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[k])]
    return True


@dataclass(frozen=True, eq=False)
class GramForm:
    """Hermitian positive-definite Gram matrix on one component."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        g = self.matrix
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionError(f"Gram matrix must be square, got {g.shape}")
        check_finite(g, "Gram matrix")
        if self.backend == Backend.EXACT:
            if any(a != b for a, b in zip(g.flat, hconj(g).flat)):
                raise MetricError("Gram matrix is not Hermitian")
            if not _exact_positive_definite(g):
                raise MetricError("Gram matrix is not positive definite")
            return
        scale = max(float(np.max(np.abs(g))) if g.size else 0.0, 1.0)
        if g.size and float(np.max(np.abs(g - g.conj().T))) > 1e-12 * scale:
            raise MetricError("Gram matrix is not Hermitian")
        if g.size:
            try:
                linalg.cholesky(g, lower=True)
            except np.linalg.LinAlgError as exc:
                raise MetricError("Gram matrix is not positive definite") from exc

    @classmethod
    def identity(cls, n: int, backend: Backend = Backend.FLOAT) -> "GramForm":
        from .matrices import eye

        return cls(eye(n, backend))

    @property
    def backend(self) -> Backend:
        return backend_of(self.matrix)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def inverse(self) -> np.ndarray:
        if self.backend == Backend.EXACT:
            return inverse(self.matrix)
        if self.dim == 0:
            return self.matrix.copy()
        c = linalg.cho_factor(self.matrix, lower=True)
        return linalg.cho_solve(c, np.eye(self.dim, dtype=np.complex128))

    @cached_property
    def cholesky(self) -> np.ndarray:
        return linalg.cholesky(to_float(self.matrix), lower=True)

    def to_float(self) -> "GramForm":
        if self.backend == Backend.FLOAT:
            return self
        return GramForm(to_float(self.matrix))

    def inner(self, u: np.ndarray, v: np.ndarray):
        """``<u, v> = v* G u`` for vectors, or the matrix of pairings for column stacks."""
        u2 = u.reshape(-1, 1) if u.ndim == 1 else u
        v2 = v.reshape(-1, 1) if v.ndim == 1 else v
        out = matmul(matmul(hconj(v2), self.matrix), u2)
        if u.ndim == 1 and v.ndim == 1:
            return out[0, 0]
        return out

    def norm(self, u: np.ndarray) -> float:
        value = self.inner(u, u)
        return float(np.sqrt(max(complex(value).real, 0.0)))


def gram_adjoint(a: np.ndarray, g_dom: GramForm, g_cod: GramForm) -> np.ndarray:
    """Adjoint ``A^dagger = G_dom^{-1} A* G_cod`` so that ``<Au, v>_cod = <u, A^dagger v>_dom``."""
    if a.shape != (g_cod.dim, g_dom.dim):
        raise DimensionError(f"Operator of shape {a.shape} between Grams {g_dom.dim} -> {g_cod.dim}")
    if g_dom.backend != backend_of(a) or g_cod.backend != backend_of(a):
        g_dom, g_cod = g_dom.to_float(), g_cod.to_float()
        a = to_float(a)
    if a.size == 0:
        return hconj(a)
    return matmul(g_dom.inverse, matmul(hconj(a), g_cod.matrix))


class Eigen(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def self_adjoint_defect(a: np.ndarray, g: GramForm) -> float:
    """Defect ``||GA - (GA)*||`` relative to ``max(||GA||, ||G|| max(1, ||A||))``.

    The scale does not shrink with ``A``, so a block that is zero up to
    round-off has a round-off sized defect.
    """
    gm, af = to_float(g.matrix), to_float(a)
    ga = gm @ af
    scale = max(float(np.linalg.norm(ga)), float(np.linalg.norm(gm)) * max(1.0, float(np.linalg.norm(af))))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(ga - ga.conj().T)) / scale


def hermitian_eigs(a: np.ndarray, g: GramForm, rel_tol: float = 1e-10) -> Eigen:
    """Ascending eigenvalues of a G-self-adjoint ``a`` with G-orthonormal eigenvectors.

    The generalized problem ``G A v = lambda G v`` is reduced through the
    Cholesky factor ``G = L L*`` to the Hermitian matrix ``L^{-1} G A L^{-*}``.
    """
    n = g.dim
    if a.shape != (n, n):
        raise DimensionError(f"Operator of shape {a.shape} on a component of dimension {n}")
    if n == 0:
        return Eigen(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    a = to_float(a)
    check_finite(a, "operator")
    defect = self_adjoint_defect(a, g)
    if defect > rel_tol:
        raise SymmetryError(f"Operator is not self-adjoint (relative defect {defect:.3e})")
    lower = g.cholesky
    ga = to_float(g.matrix) @ a
    x = linalg.solve_triangular(lower, ga, lower=True)
    c = linalg.solve_triangular(lower, x.conj().T, lower=True).conj().T
    c = 0.5 * (c + c.conj().T)
    values, y = linalg.eigh(c)
    vectors = linalg.solve_triangular(lower.conj().T, y, lower=False)
    return Eigen(values, vectors)


def zero_threshold(values: np.ndarray, rel: float = 1e-9) -> float:
    """Absolute threshold ``rel * (1 + sigma_max)`` below which an eigenvalue counts as zero."""
    smax = float(np.max(np.abs(values))) if values.size else 0.0
    return rel * (1.0 + smax)


def psd_domination_check(a: np.ndarray, b: np.ndarray, g: GramForm, tol: float = 1e-10) -> bool:
    """Whether ``B <= A`` as quadratic forms for the inner product of ``g``.

    Both operands must be self-adjoint and positive semi-definite.
    """
    for name, op in (("A", a), ("B", b)):
        try:
            values = hermitian_eigs(op, g).values
        except SymmetryError as exc:
            raise PreconditionError(f"{name} is not self-adjoint: {exc}") from exc
        if values.size and values[0] < -tol * max(1.0, float(np.max(np.abs(values)))):
            raise PreconditionError(f"{name} is not positive semi-definite (min eigenvalue {values[0]:.3e})")
    diff = hermitian_eigs(to_float(a) - to_float(b), g).values
    if diff.size == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(diff))))
    return bool(diff[0] >= -tol * scale)


def orthogonal_projector(vectors: np.ndarray, g: GramForm) -> np.ndarray:
    """G-orthogonal projector ``V V* G`` onto the span of G-orthonormal columns ``V``."""
    gm = to_float(g.matrix)
    if vectors.shape[1] == 0:
        return np.zeros_like(gm)
    return vectors @ (vectors.conj().T @ gm)


def g_orthonormal_basis(vectors: np.ndarray, g: GramForm, rel_tol: float = 1e-10) -> np.ndarray:
    """G-orthonormal basis of the span of ``vectors`` (float)."""
    v = to_float(vectors)
    if v.shape[1] == 0:
        return v
    lower_h = g.cholesky.conj().T
    w = lower_h @ v
    u, s, _ = linalg.svd(w, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((v.shape[0], 0), dtype=np.complex128)
    rank = int(np.count_nonzero(s >= rel_tol * s[0] * max(w.shape)))
    return linalg.solve_triangular(lower_h, u[:, :rank], lower=False)
