"""Dense matrices for both backends.

Exact matrices are numpy ``object`` arrays of :class:`GaussianRational`;
float matrices are ``complex128``. Row reduction for the exact backend is a
plain Gauss-Jordan sweep over Python lists.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, MetricError, NumericInputError
from .scalars import ONE, ZERO, Backend, GaussianRational, gr


def backend_of(m: np.ndarray) -> Backend:
    return Backend.EXACT if m.dtype == object else Backend.FLOAT


def zeros(rows: int, cols: int, backend: Backend) -> np.ndarray:
    if backend == Backend.EXACT:
        out = np.empty((rows, cols), dtype=object)
        out.fill(ZERO)
        return out
    return np.zeros((rows, cols), dtype=np.complex128)


def eye(n: int, backend: Backend) -> np.ndarray:
    out = zeros(n, n, backend)
    for i in range(n):
        out[i, i] = ONE if backend == Backend.EXACT else 1.0
    return out


def exact_array(rows: Sequence[Sequence]) -> np.ndarray:
    """Build an exact matrix from nested sequences of ints, fractions or literals."""
    data = [[gr(x) for x in row] for row in rows]
    n_cols = len(data[0]) if data else 0
    out = zeros(len(data), n_cols, Backend.EXACT)
    for i, row in enumerate(data):
        if len(row) != n_cols:
            raise DimensionError("Ragged rows in matrix literal")
        for j, x in enumerate(row):
            out[i, j] = x
    return out


_to_complex = np.frompyfunc(complex, 1, 1)
_conj_exact = np.frompyfunc(lambda x: x.conjugate(), 1, 1)


def to_float(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        if m.size == 0:
            return np.zeros(m.shape, dtype=np.complex128)
        return _to_complex(m).astype(np.complex128)
    return np.asarray(m, dtype=np.complex128)


def to_backend(m: np.ndarray, backend: Backend) -> np.ndarray:
    if backend == Backend.FLOAT:
        return to_float(m)
    if m.dtype != object:
        raise NumericInputError("Cannot convert a floating matrix to the exact backend")
    return m


def check_finite(m: np.ndarray, what: str = "matrix") -> None:
    if m.dtype != object and not np.all(np.isfinite(m)):
        raise NumericInputError(f"NaN or infinite entry in {what}")


def conj(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        if m.size == 0:
            return m.copy()
        return _conj_exact(m).astype(object)
    return np.conj(m)


def hconj(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return conj(m).T


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"Cannot compose {a.shape} with {b.shape}")
    if a.dtype != object and b.dtype != object:
        return a @ b
    if a.dtype != object or b.dtype != object:
        raise DimensionError("Cannot mix exact and float matrices")
    out = zeros(a.shape[0], b.shape[1], Backend.EXACT)
    if a.shape[1] == 0:
        return out
    b_rows = [[(j, x) for j, x in enumerate(b[k]) if x] for k in range(b.shape[0])]
    for i in range(a.shape[0]):
        acc = {}
        for k, aik in enumerate(a[i]):
            if not aik:
                continue
            for j, bkj in b_rows[k]:
                acc[j] = acc.get(j, ZERO) + aik * bkj
        for j, x in acc.items():
            out[i, j] = x
    return out


def scale(m: np.ndarray, c) -> np.ndarray:
    if m.dtype == object:
        c = gr(c) if not isinstance(c, GaussianRational) else c
        out = zeros(*m.shape, Backend.EXACT)
        for idx, x in np.ndenumerate(m):
            if x:
                out[idx] = x * c
        return out
    return m * complex(c)


def is_zero(m: np.ndarray, tol: float = 0.0) -> bool:
    if m.size == 0:
        return True
    if m.dtype == object:
        return not any(bool(x) for x in m.flat)
    return float(np.max(np.abs(m))) <= tol


def fro_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(to_float(m))) if m.size else 0.0


def rref(m: np.ndarray) -> Tuple[List[List[GaussianRational]], List[int]]:
    """Reduced row echelon form of an exact matrix and its pivot columns."""
    rows = [list(r) for r in m]
    n_rows = len(rows)
    n_cols = m.shape[1]
    pivots: List[int] = []
    piv_r = 0
    for piv_c in range(n_cols):
        if piv_r == n_rows:
            break
        for i_row in range(piv_r, n_rows):
            if rows[i_row][piv_c]:
                break
        else:
            continue
        if i_row != piv_r:
            rows[piv_r], rows[i_row] = rows[i_row], rows[piv_r]
        inv = ONE / rows[piv_r][piv_c]
        rows[piv_r] = [x * inv if x else ZERO for x in rows[piv_r]]
        for r in range(n_rows):
            if r == piv_r:
                continue
            f = rows[r][piv_c]
            if not f:
                continue
            prow = rows[piv_r]
            rows[r] = [x - f * y if y else x for x, y in zip(rows[r], prow)]
        pivots.append(piv_c)
        piv_r += 1
    return rows, pivots


def det(m: np.ndarray):
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionError(f"Determinant of non-square {m.shape} matrix")
    if n == 0:
        return ONE if m.dtype == object else 1.0 + 0j
    if m.dtype != object:
        return complex(np.linalg.det(m))
    rows = [list(r) for r in m]
    result = ONE
    for c in range(n):
        for r in range(c, n):
            if rows[r][c]:
                break
        else:
            return ZERO
        if r != c:
            rows[c], rows[r] = rows[r], rows[c]
            result = -result
        piv = rows[c][c]
        result = result * piv
        for r2 in range(c + 1, n):
            f = rows[r2][c]
            if f:
                f = f / piv
                rows[r2] = [x - f * y for x, y in zip(rows[r2], rows[c])]
    return result


def inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionError(f"Inverse of non-square {m.shape} matrix")
    if m.dtype != object:
        return np.linalg.inv(m)
    aug = np.concatenate([m, eye(n, Backend.EXACT)], axis=1)
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise MetricError("Singular matrix has no inverse")
    out = zeros(n, n, Backend.EXACT)
    for i in range(n):
        for j in range(n):
            out[i, j] = rows[i][n + j]
    return out
