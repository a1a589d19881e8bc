"""(N,F)-regrading of the holomorphic column of a Frölicher complex."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import IntegrabilityError
from ..linalg import Backend, is_zero, zeros
from ..operators import BigradedOperator, Bidegree
from ..utils import get_logger
from .complex import DoubleComplex
from .forms import Monomial

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class FoliatedComplex(DoubleComplex):
    """``E^{p,q} = Lambda^p N* (x) Lambda^q F*`` with ``d1 = del_N`` and ``d2 = del_F``.

    ``positions[(p, q)]`` lists the indices of the ``E^{p,q}`` basis inside the
    basis of ``K^{p+q,0}`` of ``base``; both bases are lexicographic.
    """

    base: DoubleComplex = field(default=None, repr=False)
    n_idx: Tuple[int, ...] = ()
    f_idx: Tuple[int, ...] = ()
    positions: Dict[Bidegree, List[int]] = field(default_factory=dict, repr=False)

    @property
    def del_n(self) -> BigradedOperator:
        return self.d1

    @property
    def del_f(self) -> BigradedOperator:
        return self.d2

    @property
    def rank(self) -> int:
        return len(self.n_idx)

    def total_degree_basis(self, k: int) -> List[Bidegree]:
        """Components of ``Lambda^{k,0}`` in the order used for total-degree matrices."""
        return [(p, k - p) for p in range(k + 1) if (p, k - p) in self.dims]

    def to_float(self) -> "FoliatedComplex":
        if self.backend == Backend.FLOAT:
            return self
        return FoliatedComplex(
            dims=self.dims,
            d1=self.d1.to_float(),
            d2=self.d2.to_float(),
            label=self.label,
            n=self.n,
            bases=self.bases,
            equations=self.equations,
            algebra=self.algebra,
            base=self.base.to_float(),
            n_idx=self.n_idx,
            f_idx=self.f_idx,
            positions=self.positions,
        )


def check_foliation_integrability(k: DoubleComplex, n_idx: Sequence[int], f_idx: Sequence[int]) -> None:
    """``[N,N] in N`` and ``[F,F] in F`` read off the (2,0) structure constants."""
    eq = k.equations
    if eq is None:
        raise IntegrabilityError(f"{k.label}: a foliated split needs the structure equations")
    n_set, f_set = set(n_idx), set(f_idx)
    for i, terms in sorted(eq.d20.items()):
        for (j, l), c in sorted(terms.items()):
            if not c:
                continue
            inside = None
            if i in n_set and j in f_set and l in f_set:
                inside = "[F,F] is not contained in F"
            elif i in f_set and j in n_set and l in n_set:
                inside = "[N,N] is not contained in N"
            if inside:
                raise IntegrabilityError(
                    f"{k.label}: structure constant A^{eq.names[i]}_{eq.names[j]}{eq.names[l]} = {c} "
                    f"is nonzero, so {inside}"
                )


def foliated_split(k: DoubleComplex, n_idx: Sequence[int], f_idx: Sequence[int]) -> FoliatedComplex:
    """Split ``del`` on ``Lambda^{*,0}`` as ``del_N + del_F`` for the partition ``N | F``.

    Indices are 0-based positions in the (1,0) coframe.
    """
    n = k.n
    n_idx = tuple(sorted(int(i) for i in n_idx))
    f_idx = tuple(sorted(int(i) for i in f_idx))
    if sorted(n_idx + f_idx) != list(range(n)) or not n_idx or not f_idx:
        raise IntegrabilityError(
            f"{k.label}: N={list(n_idx)} and F={list(f_idx)} must partition 0..{n - 1} into two nonempty sets"
        )
    check_foliation_integrability(k, n_idx, f_idx)
    n_set = set(n_idx)
    alg = k.algebra

    def ntype(m: Monomial) -> Bidegree:
        p = sum(1 for x in m if x in n_set)
        return p, len(m) - p

    positions: Dict[Bidegree, List[int]] = {}
    bases: Dict[Bidegree, List[Monomial]] = {}
    for deg in range(n + 1):
        for pos, m in enumerate(alg.basis(deg, 0)):
            key = ntype(m)
            positions.setdefault(key, []).append(pos)
            bases.setdefault(key, []).append(m)
    dims = {key: len(v) for key, v in positions.items()}

    backend = k.backend
    dn_blocks: Dict[Bidegree, np.ndarray] = {}
    df_blocks: Dict[Bidegree, np.ndarray] = {}
    for (p, q), cols in positions.items():
        full = k.d1.block(p + q, 0)
        for tgt, store in (((p + 1, q), dn_blocks), ((p, q + 1), df_blocks)):
            if tgt not in positions:
                continue
            block = full[np.ix_(positions[tgt], cols)]
            if not is_zero(block):
                store[(p, q)] = block
        # anything else would leave E^{p+1,q} + E^{p,q+1}
        stray = [key for key in positions if sum(key) == p + q + 1 and key not in ((p + 1, q), (p, q + 1))]
        for key in stray:
            if not is_zero(full[np.ix_(positions[key], cols)], 1e-12):
                raise IntegrabilityError(f"{k.label}: del maps E^{(p, q)} into E^{key}")

    fk = FoliatedComplex(
        dims=dims,
        d1=BigradedOperator((1, 0), dims, dn_blocks, backend),
        d2=BigradedOperator((0, 1), dims, df_blocks, backend),
        label=f"{k.label}[N={','.join(str(i + 1) for i in n_idx)}|F={','.join(str(i + 1) for i in f_idx)}]",
        n=n,
        bases=bases,
        equations=k.equations,
        algebra=alg,
        base=k,
        n_idx=n_idx,
        f_idx=f_idx,
        positions=positions,
    )
    fk.check_invariants(tol=1e-12)
    logger.debug("Foliated split %s: %d components", fk.label, len(dims))
    return fk


def embedding(fk: FoliatedComplex, k: int) -> np.ndarray:
    """0/1 matrix from concatenated ``E^{p,k-p}`` coordinates to ``K^{k,0}`` coordinates."""
    comps = fk.total_degree_basis(k)
    total = fk.base.dim(k, 0)
    out = zeros(total, sum(fk.dim(*c) for c in comps), Backend.FLOAT)
    col = 0
    for c in comps:
        for pos in fk.positions[c]:
            out[pos, col] = 1.0
            col += 1
    return out
