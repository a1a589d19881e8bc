"""Subspaces, rank policy and the rank/kernel/image decomposition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from ..errors import DimensionError
from .matrices import (
    backend_of,
    check_finite,
    eye,
    hconj,
    matmul,
    rref,
    to_float,
    zeros,
)
from .scalars import ONE, Backend


@dataclass(frozen=True)
class RankPolicy:
    """Singular values below ``rel_tol * sigma_max * max(rows, cols)`` count as zero."""

    rel_tol: float = 1e-10

    def rank_from_singular_values(self, s: np.ndarray, shape) -> int:
        if s.size == 0 or s[0] == 0.0:
            return 0
        threshold = self.rel_tol * float(s[0]) * max(shape)
        return int(np.count_nonzero(s >= threshold))


DEFAULT_POLICY = RankPolicy()


def _svd(m: np.ndarray):
    return scipy.linalg.svd(m, full_matrices=True, lapack_driver="gesvd")


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of C^ambient_dim given by independent basis columns.

    Float bases are orthonormal for the Euclidean product; exact bases are in
    reduced column echelon form, so equal subspaces have equal bases.
    """

    ambient_dim: int
    basis: np.ndarray
    backend: Backend
    policy: RankPolicy = DEFAULT_POLICY

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @classmethod
    def zero(cls, ambient_dim: int, backend: Backend, policy: RankPolicy = DEFAULT_POLICY) -> "Subspace":
        return cls(ambient_dim, zeros(ambient_dim, 0, backend), backend, policy)

    @classmethod
    def full(cls, ambient_dim: int, backend: Backend, policy: RankPolicy = DEFAULT_POLICY) -> "Subspace":
        return cls(ambient_dim, eye(ambient_dim, backend), backend, policy)

    @classmethod
    def span(cls, vectors: np.ndarray, policy: RankPolicy = DEFAULT_POLICY) -> "Subspace":
        """Subspace spanned by the columns of ``vectors``."""
        backend = backend_of(vectors)
        ambient = vectors.shape[0]
        if vectors.shape[1] == 0 or ambient == 0:
            return cls.zero(ambient, backend, policy)
        if backend == Backend.EXACT:
            rows, pivots = rref(vectors.T)
            basis = zeros(ambient, len(pivots), backend)
            for j in range(len(pivots)):
                for i in range(ambient):
                    basis[i, j] = rows[j][i]
            return cls(ambient, basis, backend, policy)
        check_finite(vectors, "spanning set")
        u, s, _ = _svd(vectors)
        rank = policy.rank_from_singular_values(s, vectors.shape)
        return cls(ambient, np.ascontiguousarray(u[:, :rank]), backend, policy)

    def _check(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError(
                f"Subspaces live in ambient dimensions {self.ambient_dim} and {other.ambient_dim}"
            )
        if self.backend != other.backend:
            raise DimensionError("Subspaces use different backends")

    def sum(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.span(np.concatenate([self.basis, other.basis], axis=1), self.policy)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim, self.backend, self.policy)
        stacked = np.concatenate([self.basis, -other.basis], axis=1)
        kernel = rank_kernel_image(stacked, self.policy).kernel
        return Subspace.span(matmul(self.basis, kernel.basis[: self.dim, :]), self.policy)

    def orth_complement(self, gram) -> "Subspace":
        """Complement for the inner product ``<u, v> = v* G u``."""
        g = getattr(gram, "matrix", gram)
        if g.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionError(f"Gram of shape {g.shape} on ambient dimension {self.ambient_dim}")
        if self.dim == 0:
            return Subspace.full(self.ambient_dim, self.backend, self.policy)
        g = g if self.backend == Backend.EXACT else to_float(g)
        return rank_kernel_image(matmul(hconj(self.basis), g), self.policy).kernel

    def contains(self, vectors: np.ndarray) -> bool:
        if vectors.shape[0] != self.ambient_dim:
            raise DimensionError("Vectors do not live in the ambient space")
        if vectors.shape[1] == 0:
            return True
        return self.sum(Subspace.span(vectors, self.policy)).dim == self.dim

    def includes(self, other: "Subspace") -> bool:
        self._check(other)
        return self.contains(other.basis)

    def equals(self, other: "Subspace") -> bool:
        return self.dim == other.dim and self.includes(other)

    def residual(self, vectors: np.ndarray) -> float:
        """Largest Euclidean distance of a unit-normalised column to the subspace."""
        v = to_float(vectors)
        if v.shape[1] == 0:
            return 0.0
        norms = np.linalg.norm(v, axis=0)
        norms[norms == 0.0] = 1.0
        v = v / norms
        if self.dim == 0:
            return float(np.max(np.linalg.norm(v, axis=0)))
        q = to_float(self.basis) if self.backend == Backend.FLOAT else scipy.linalg.orth(to_float(self.basis))
        rest = v - q @ (q.conj().T @ v)
        return float(np.max(np.linalg.norm(rest, axis=0)))

    def to_float(self) -> "Subspace":
        if self.backend == Backend.FLOAT:
            return self
        return Subspace.span(to_float(self.basis), self.policy)


class RankKernelImage(NamedTuple):
    rank: int
    kernel: Subspace
    image: Subspace


def rank_kernel_image(m: np.ndarray, policy: Optional[RankPolicy] = None) -> RankKernelImage:
    """Rank of ``m`` together with its kernel and image as subspaces."""
    policy = policy or DEFAULT_POLICY
    backend = backend_of(m)
    n_rows, n_cols = m.shape
    if n_rows == 0 or n_cols == 0:
        return RankKernelImage(
            0, Subspace.full(n_cols, backend, policy), Subspace.zero(n_rows, backend, policy)
        )
    if backend == Backend.EXACT:
        rows, pivots = rref(m)
        pivot_set = set(pivots)
        free = [c for c in range(n_cols) if c not in pivot_set]
        kernel = zeros(n_cols, len(free), backend)
        for j, f in enumerate(free):
            kernel[f, j] = ONE
            for i, pc in enumerate(pivots):
                if rows[i][f]:
                    kernel[pc, j] = -rows[i][f]
        image = Subspace.span(m[:, pivots], policy)
        return RankKernelImage(len(pivots), Subspace(n_cols, kernel, backend, policy), image)
    check_finite(m)
    u, s, vh = _svd(m)
    rank = policy.rank_from_singular_values(s, m.shape)
    kernel = np.ascontiguousarray(vh[rank:].conj().T)
    image = np.ascontiguousarray(u[:, :rank])
    return RankKernelImage(
        rank, Subspace(n_cols, kernel, backend, policy), Subspace(n_rows, image, backend, policy)
    )


def subspace_algebra(u: Subspace, v: Subspace, op: str, gram=None) -> Subspace:
    """Dispatch ``sum``, ``intersect`` or ``orth_complement`` (the latter ignores ``v``)."""
    if op == "sum":
        return u.sum(v)
    if op == "intersect":
        return u.intersect(v)
    if op == "orth_complement":
        if gram is None:
            raise DimensionError("orth_complement needs a Gram form")
        return u.orth_complement(gram)
    raise ValueError(f"Unknown subspace operation {op!r}")
