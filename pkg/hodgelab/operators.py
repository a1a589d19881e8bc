"""Bigraded operators: one matrix per source component, fixed bidegree offset."""

from __future__ import annotations

from typing import Callable, Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from .errors import DimensionError
from .linalg import (
    Backend,
    GramForm,
    eye,
    fro_norm,
    gram_adjoint,
    gr,
    is_zero,
    matmul,
    scale,
    to_float,
    zeros,
)

Bidegree = Tuple[int, int]


class BigradedOperator:
    """Linear map ``K^{p,q} -> K^{p+a,q+b}`` on every component of a bigraded space.

    ``dims`` lists every component that exists; a block whose target does not
    exist has zero rows. Missing blocks are zero.
    """

    __slots__ = ("bidegree", "dims", "backend", "_blocks")

    def __init__(
        self,
        bidegree: Bidegree,
        dims: Mapping[Bidegree, int],
        blocks: Optional[Mapping[Bidegree, np.ndarray]] = None,
        backend: Backend = Backend.EXACT,
    ) -> None:
        self.bidegree = (int(bidegree[0]), int(bidegree[1]))
        self.dims = dict(dims)
        self.backend = backend
        self._blocks: Dict[Bidegree, np.ndarray] = {}
        for key, m in (blocks or {}).items():
            if key not in self.dims:
                raise DimensionError(f"Block at missing component {key}")
            expected = (self.dim(*self.target(*key)), self.dims[key])
            if m.shape != expected:
                raise DimensionError(f"Block at {key} has shape {m.shape}, expected {expected}")
            self._blocks[key] = m if backend == Backend.EXACT else to_float(m)

    @property
    def degree(self) -> int:
        return self.bidegree[0] + self.bidegree[1]

    def dim(self, p: int, q: int) -> int:
        return self.dims.get((p, q), 0)

    def target(self, p: int, q: int) -> Bidegree:
        return (p + self.bidegree[0], q + self.bidegree[1])

    def block(self, p: int, q: int) -> np.ndarray:
        m = self._blocks.get((p, q))
        if m is None:
            return zeros(self.dim(*self.target(p, q)), self.dim(p, q), self.backend)
        return m

    def blocks(self) -> Iterator[Tuple[Bidegree, np.ndarray]]:
        for key in sorted(self.dims):
            yield key, self.block(*key)

    def apply(self, vector: np.ndarray, p: int, q: int) -> np.ndarray:
        return matmul(self.block(p, q), vector.reshape(-1, 1)).reshape(-1)

    @classmethod
    def zero(cls, bidegree: Bidegree, dims: Mapping[Bidegree, int], backend: Backend) -> "BigradedOperator":
        return cls(bidegree, dims, {}, backend)

    @classmethod
    def identity(cls, dims: Mapping[Bidegree, int], backend: Backend) -> "BigradedOperator":
        return cls((0, 0), dims, {k: eye(d, backend) for k, d in dims.items()}, backend)

    @classmethod
    def diagonal(
        cls, dims: Mapping[Bidegree, int], backend: Backend, value: Callable[[int, int], object]
    ) -> "BigradedOperator":
        """Scalar multiple of the identity on each component, ``value(p, q)``."""
        blocks = {}
        for (p, q), d in dims.items():
            blocks[(p, q)] = scale(eye(d, backend), value(p, q))
        return cls((0, 0), dims, blocks, backend)

    def to_float(self) -> "BigradedOperator":
        if self.backend == Backend.FLOAT:
            return self
        return BigradedOperator(
            self.bidegree, self.dims, {k: to_float(m) for k, m in self._blocks.items()}, Backend.FLOAT
        )

    def _aligned(self, other: "BigradedOperator"):
        if self.dims != other.dims:
            raise DimensionError("Operators act on different bigraded spaces")
        if self.backend == other.backend:
            return self, other
        return self.to_float(), other.to_float()

    def __add__(self, other: "BigradedOperator") -> "BigradedOperator":
        a, b = self._aligned(other)
        if a.bidegree != b.bidegree:
            raise DimensionError(f"Cannot add bidegrees {a.bidegree} and {b.bidegree}")
        blocks = {}
        for key in set(a._blocks) | set(b._blocks):
            blocks[key] = a.block(*key) + b.block(*key)
        return BigradedOperator(a.bidegree, a.dims, blocks, a.backend)

    def __neg__(self) -> "BigradedOperator":
        return BigradedOperator(self.bidegree, self.dims, {k: -m for k, m in self._blocks.items()}, self.backend)

    def __sub__(self, other: "BigradedOperator") -> "BigradedOperator":
        return self + (-other)

    def __mul__(self, c) -> "BigradedOperator":
        if self.backend == Backend.EXACT and isinstance(c, (float, complex)):
            return self.to_float() * c
        if self.backend == Backend.EXACT:
            c = gr(c)
        return BigradedOperator(
            self.bidegree, self.dims, {k: scale(m, c) for k, m in self._blocks.items()}, self.backend
        )

    __rmul__ = __mul__

    def __matmul__(self, other: "BigradedOperator") -> "BigradedOperator":
        """Composition ``self o other``."""
        a, b = self._aligned(other)
        bidegree = (a.bidegree[0] + b.bidegree[0], a.bidegree[1] + b.bidegree[1])
        blocks = {}
        for key in b._blocks:
            mid = b.target(*key)
            if mid not in a._blocks or a.dim(*mid) == 0:
                continue
            blocks[key] = matmul(a._blocks[mid], b._blocks[key])
        return BigradedOperator(bidegree, a.dims, blocks, a.backend)

    def adjoint(self, grams: Mapping[Bidegree, GramForm]) -> "BigradedOperator":
        """Metric adjoint; it has bidegree ``(-a, -b)``."""
        a, b = self.bidegree
        backend = self.backend
        if backend == Backend.EXACT and any(g.backend == Backend.FLOAT for g in grams.values()):
            backend = Backend.FLOAT
        blocks = {}
        for (p, q), m in self._blocks.items():
            tgt = self.target(p, q)
            if tgt not in self.dims:
                continue
            blocks[tgt] = gram_adjoint(m, grams[(p, q)], grams[tgt])
        return BigradedOperator((-a, -b), self.dims, blocks, backend)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(is_zero(m, tol) for m in self._blocks.values())

    def norm(self) -> float:
        """Largest Frobenius norm over the blocks."""
        return max((fro_norm(m) for m in self._blocks.values()), default=0.0)

    def block_norms(self) -> Dict[Bidegree, float]:
        return {k: fro_norm(self.block(*k)) for k in sorted(self.dims)}

    def __repr__(self) -> str:
        return f"BigradedOperator(bidegree={self.bidegree}, components={len(self.dims)}, backend={self.backend.value})"


def commutator(a: BigradedOperator, b: BigradedOperator) -> BigradedOperator:
    """Graded commutator ``[A, B] = AB - (-1)^{deg A deg B} BA``."""
    sign = -1 if (a.degree * b.degree) % 2 == 0 else 1
    return a @ b + (b @ a) * sign


def relative_residual(lhs: BigradedOperator, rhs: BigradedOperator) -> float:
    """``||L - R|| / max(||L||, ||R||, 1)`` with the largest-block Frobenius norm."""
    diff = (lhs - rhs).norm()
    return diff / max(lhs.norm(), rhs.norm(), 1.0)


