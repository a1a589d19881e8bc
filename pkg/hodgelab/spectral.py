"""Pages of the column-filtration spectral sequence of a bounded double complex.

Every page is computed from zigzag subspaces of ``K^{p,q}``: a class in
``E_r^{p,q}`` is represented by the first slot of a chain
``alpha_0, ..., alpha_{r-1}`` with ``alpha_i`` in ``K^{p+i,q-i}``,
``d2 alpha_0 = 0`` and ``d1 alpha_{i-1} + d2 alpha_i = 0``. No page
differential is ever materialized; degeneration is read off from dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import InternalConsistencyError
from .linalg import (
    DEFAULT_POLICY,
    Backend,
    RankPolicy,
    Subspace,
    eye,
    matmul,
    rank_kernel_image,
    zeros,
)
from .models.complex import DoubleComplex
from .operators import Bidegree
from .utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class PageTable:
    """Dimensions of ``E_r`` and, optionally, the ``(Z_r, B_r)`` pairs behind them."""

    r: int
    dims: Dict[Bidegree, int]
    representatives: Optional[Dict[Bidegree, Tuple[Subspace, Subspace]]] = field(default=None, repr=False)

    def total(self, k: int) -> int:
        return sum(d for (p, q), d in self.dims.items() if p + q == k)

    def dims_by_key(self) -> Dict[str, int]:
        return {f"{p},{q}": d for (p, q), d in sorted(self.dims.items())}


@dataclass(frozen=True)
class ConvergenceReport:
    degeneration_index: int
    betti: List[int]
    page_sums: Dict[Tuple[int, int], int]
    pages: Dict[int, PageTable] = field(repr=False)

    def page(self, r: int) -> PageTable:
        return self.pages[r]


def _slot_matrix(k: DoubleComplex, op, src: Bidegree, tgt: Bidegree) -> np.ndarray:
    """Block of ``op`` from ``src`` to ``tgt``; zero-sized when either component is missing."""
    rows, cols = k.dim(*tgt), k.dim(*src)
    if rows == 0 or cols == 0 or op.target(*src) != tgt:
        return zeros(rows, cols, k.backend)
    return op.block(*src)


def _zigzag_kernel(k: DoubleComplex, p: int, q: int, r: int, policy: RankPolicy):
    """Kernel of the zigzag system of length ``r`` anchored at ``(p, q)`` and the slot offsets."""
    slots = [(p + i, q - i) for i in range(r)]
    slot_dims = [k.dim(*s) for s in slots]
    offsets = np.concatenate([[0], np.cumsum(slot_dims)]).astype(int)
    equations = [(p + i, q + 1 - i) for i in range(r)]
    eq_dims = [k.dim(*e) for e in equations]
    eq_offsets = np.concatenate([[0], np.cumsum(eq_dims)]).astype(int)
    system = zeros(int(eq_offsets[-1]), int(offsets[-1]), k.backend)
    for i, tgt in enumerate(equations):
        r0, r1 = eq_offsets[i], eq_offsets[i + 1]
        if r1 == r0:
            continue
        # d2 alpha_i
        c0, c1 = offsets[i], offsets[i + 1]
        if c1 > c0:
            system[r0:r1, c0:c1] = _slot_matrix(k, k.d2, slots[i], tgt)
        # d1 alpha_{i-1}
        if i >= 1:
            c0, c1 = offsets[i - 1], offsets[i]
            if c1 > c0:
                system[r0:r1, c0:c1] = _slot_matrix(k, k.d1, slots[i - 1], tgt)
    kernel = rank_kernel_image(system, policy).kernel
    return kernel, offsets


def zigzag_space(k: DoubleComplex, p: int, q: int, r: int, policy: RankPolicy = DEFAULT_POLICY) -> Subspace:
    """``Z_r^{p,q}``: first slots of zigzags of length ``r``; ``Z_1 = ker d2``."""
    if r < 1:
        raise ValueError(f"page index must be >= 1, got {r}")
    dim = k.dim(p, q)
    if dim == 0:
        return Subspace.zero(0, k.backend, policy)
    kernel, offsets = _zigzag_kernel(k, p, q, r, policy)
    return Subspace.span(kernel.basis[offsets[0]:offsets[1], :], policy)


def _last_slot(k: DoubleComplex, p: int, q: int, length: int, policy: RankPolicy) -> Subspace:
    """Last slots of zigzags of the given length anchored at ``(p, q)``."""
    last = (p + length - 1, q - length + 1)
    if k.dim(*last) == 0:
        return Subspace.zero(k.dim(*last), k.backend, policy)
    kernel, offsets = _zigzag_kernel(k, p, q, length, policy)
    return Subspace.span(kernel.basis[offsets[-2]:offsets[-1], :], policy)


def _image(m: np.ndarray, rows: int, backend: Backend, policy: RankPolicy) -> Subspace:
    if m.shape[1] == 0 or rows == 0:
        return Subspace.zero(rows, backend, policy)
    return rank_kernel_image(m, policy).image


def boundary_space(k: DoubleComplex, p: int, q: int, r: int, policy: RankPolicy = DEFAULT_POLICY) -> Subspace:
    """``B_r^{p,q}``: ``Im d2`` plus ``d1`` of the last slots of zigzags ending in ``K^{p-1,q}``."""
    if r < 1:
        raise ValueError(f"page index must be >= 1, got {r}")
    dim = k.dim(p, q)
    if dim == 0:
        return Subspace.zero(0, k.backend, policy)
    out = _image(_slot_matrix(k, k.d2, (p, q - 1), (p, q)), dim, k.backend, policy)
    if r >= 2 and k.dim(p - 1, q):
        tail = _last_slot(k, p - r + 1, q + r - 2, r - 1, policy)
        if tail.dim:
            pushed = matmul(_slot_matrix(k, k.d1, (p - 1, q), (p, q)), tail.basis)
            out = out.sum(Subspace.span(pushed, policy))
    return out


def page_table(
    k: DoubleComplex,
    r: int,
    policy: RankPolicy = DEFAULT_POLICY,
    keep_representatives: bool = False,
) -> PageTable:
    """``dim E_r^{p,q} = dim Z_r - dim B_r`` at every component, with ``B_r`` inside ``Z_r`` checked."""
    dims: Dict[Bidegree, int] = {}
    reps: Dict[Bidegree, Tuple[Subspace, Subspace]] = {}
    for p, q in k.components():
        z = zigzag_space(k, p, q, r, policy)
        b = boundary_space(k, p, q, r, policy)
        if not z.includes(b):
            raise InternalConsistencyError(f"{k.label}: B_{r}^{{{p},{q}}} is not contained in Z_{r}^{{{p},{q}}}")
        dims[(p, q)] = z.dim - b.dim
        if keep_representatives:
            reps[(p, q)] = (z, b)
    logger.debug("%s: E_%d computed on %d components", k.label, r, len(dims))
    return PageTable(r, dims, reps if keep_representatives else None)


def total_differential(k: DoubleComplex, deg: int) -> np.ndarray:
    """Matrix of ``d1 + d2`` from total degree ``deg`` to ``deg + 1`` (components in sorted order)."""
    src = [c for c in k.components() if sum(c) == deg]
    tgt = [c for c in k.components() if sum(c) == deg + 1]
    col_off = np.concatenate([[0], np.cumsum([k.dim(*c) for c in src])]).astype(int)
    row_off = np.concatenate([[0], np.cumsum([k.dim(*c) for c in tgt])]).astype(int)
    out = zeros(int(row_off[-1]), int(col_off[-1]), k.backend)
    for j, s in enumerate(src):
        for i, t in enumerate(tgt):
            for op in (k.d1, k.d2):
                if op.target(*s) == t:
                    out[row_off[i]:row_off[i + 1], col_off[j]:col_off[j + 1]] = op.block(*s)
    return out


def total_cohomology(k: DoubleComplex, policy: RankPolicy = DEFAULT_POLICY) -> List[int]:
    """Betti numbers ``b_k`` of the total complex ``(K, d1 + d2)``."""
    degrees = list(k.total_degrees())
    ranks = {deg: rank_kernel_image(total_differential(k, deg), policy).rank for deg in degrees}
    betti = []
    for deg in degrees:
        size = sum(k.dim(*c) for c in k.components() if sum(c) == deg)
        betti.append(size - ranks[deg] - ranks.get(deg - 1, 0))
    return betti


def degeneration_index(
    k: DoubleComplex,
    max_page: Optional[int] = None,
    policy: RankPolicy = DEFAULT_POLICY,
) -> ConvergenceReport:
    """Least ``r`` with ``E_r = E_{r+1}`` and ``sum_{p+q=k} dim E_r^{p,q} = b_k`` for all ``k``.

    Pages are computed at least up to ``max_page`` for reporting.
    """
    betti = total_cohomology(k, policy)
    degrees = list(k.total_degrees())
    bound = k.p_max + 2
    pages: Dict[int, PageTable] = {1: page_table(k, 1, policy)}
    sums: Dict[Tuple[int, int], int] = {}
    index = None
    r = 1
    while r <= bound:
        if r + 1 not in pages:
            pages[r + 1] = page_table(k, r + 1, policy)
        current, nxt = pages[r], pages[r + 1]
        for deg in degrees:
            sums[(r, deg)] = current.total(deg)
            if sums[(r, deg)] < betti[deg]:
                raise InternalConsistencyError(
                    f"{k.label}: sum of dim E_{r} in degree {deg} is {sums[(r, deg)]} < b_{deg} = {betti[deg]}"
                )
        for key, d in nxt.dims.items():
            if d > current.dims[key]:
                raise InternalConsistencyError(f"{k.label}: dim E_{r + 1}^{key} exceeds dim E_{r}^{key}")
        if index is None and current.dims == nxt.dims and all(sums[(r, deg)] == betti[deg] for deg in degrees):
            index = r
        if index is not None and r + 1 >= (max_page or 0):
            break
        r += 1
    if index is None:
        raise InternalConsistencyError(
            f"{k.label}: pages did not converge to the total cohomology {betti} by page {bound}"
        )
    last = max(pages)
    for deg in degrees:
        sums.setdefault((last, deg), pages[last].total(deg))
    logger.info("%s: degenerates at E_%d (b = %s)", k.label, index, betti)
    return ConvergenceReport(index, betti, sums, pages)


@dataclass(frozen=True)
class E2CrossCheck:
    p: int
    q: int
    engine_dim: int
    quotient_dim: int
    z_agrees: bool
    b_agrees: bool

    @property
    def ok(self) -> bool:
        return self.z_agrees and self.b_agrees and self.engine_dim == self.quotient_dim


def _annihilator(space: Subspace) -> np.ndarray:
    """Rows ``C`` with ``C v = 0`` exactly when ``v`` lies in ``space``."""
    if space.dim == 0:
        return eye(space.ambient_dim, space.backend)
    ker = rank_kernel_image(space.basis.T, space.policy).kernel
    return ker.basis.T


def e2_cross_check(k: DoubleComplex, p: int, q: int, policy: RankPolicy = DEFAULT_POLICY) -> E2CrossCheck:
    """``E_2`` as ``{a in ker d2 : d1 a in Im d2} / (Im d2 + d1 ker d2)`` by plain subspace algebra."""
    dim = k.dim(p, q)
    backend = k.backend
    dbar = _slot_matrix(k, k.d2, (p, q), (p, q + 1))
    dl = _slot_matrix(k, k.d1, (p, q), (p + 1, q))
    im_next = _image(_slot_matrix(k, k.d2, (p + 1, q - 1), (p + 1, q)), k.dim(p + 1, q), backend, policy)
    constraint = matmul(_annihilator(im_next), dl) if k.dim(p + 1, q) else zeros(0, dim, backend)
    stacked = np.concatenate([dbar, constraint], axis=0)
    z = rank_kernel_image(stacked, policy).kernel if stacked.shape[0] else Subspace.full(dim, backend, policy)

    b = _image(_slot_matrix(k, k.d2, (p, q - 1), (p, q)), dim, backend, policy)
    if k.dim(p - 1, q):
        ker_prev = rank_kernel_image(_slot_matrix(k, k.d2, (p - 1, q), (p - 1, q + 1)), policy).kernel
        if ker_prev.dim:
            b = b.sum(Subspace.span(matmul(_slot_matrix(k, k.d1, (p - 1, q), (p, q)), ker_prev.basis), policy))

    z2 = zigzag_space(k, p, q, 2, policy)
    b2 = boundary_space(k, p, q, 2, policy)
    return E2CrossCheck(
        p=p,
        q=q,
        engine_dim=z2.dim - b2.dim,
        quotient_dim=z.dim - b.dim,
        z_agrees=z.equals(z2) if dim else True,
        b_agrees=b.equals(b2) if dim else True,
    )


def backend_agreement(k: DoubleComplex, max_page: int = 2, policy: RankPolicy = DEFAULT_POLICY) -> Dict[int, PageTable]:
    """Page dimensions from both backends; any disagreement aborts."""
    exact = k if k.backend == Backend.EXACT else None
    if exact is None:
        raise InternalConsistencyError(f"{k.label}: backend agreement needs an exact complex")
    floated = k.to_float()
    out = {}
    for r in range(1, max_page + 1):
        a = page_table(exact, r, policy)
        b = page_table(floated, r, policy)
        if a.dims != b.dims:
            bad = sorted(key for key in a.dims if a.dims[key] != b.dims[key])
            raise InternalConsistencyError(
                f"{k.label}: float and exact page dimensions disagree on E_{r} at {bad}"
            )
        out[r] = a
    return out
