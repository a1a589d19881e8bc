"""Exterior algebra on ``w1..wn, conj(w1)..conj(wn)`` with multi-index bases.

A monomial is a strictly increasing tuple of generator indices; indices
``0..n-1`` are the (1,0) generators and ``n..2n-1`` their conjugates, so a
sorted monomial always reads ``w^I ^ conj(w)^J``. A form is a dict from
monomials to scalars.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..linalg import Backend, GaussianRational, zeros

Monomial = Tuple[int, ...]
Form = Dict[Monomial, object]


def wedge_monomials(a: Monomial, b: Monomial) -> Optional[Tuple[int, Monomial]]:
    """``a ^ b`` as ``(sign, sorted monomial)``, or ``None`` when a generator repeats."""
    if set(a) & set(b):
        return None
    inversions = sum(1 for x in a for y in b if x > y)
    sign = -1 if inversions % 2 else 1
    return sign, tuple(sorted(a + b))


def _conj_scalar(c):
    return c.conjugate()


def _is_zero(c) -> bool:
    return not c if isinstance(c, GaussianRational) else c == 0


def clean(form: Form) -> Form:
    return {m: c for m, c in form.items() if not _is_zero(c)}


def _accumulate(out: Form, m: Monomial, c) -> None:
    out[m] = out[m] + c if m in out else c


def add(a: Form, b: Form, sign: int = 1) -> Form:
    out = dict(a)
    for m, c in b.items():
        _accumulate(out, m, c if sign == 1 else -c)
    return clean(out)


def scale_form(a: Form, c) -> Form:
    return clean({m: x * c for m, x in a.items()})


def wedge(a: Form, b: Form) -> Form:
    """Wedge product of two forms; graded-commutative and associative."""
    out: Form = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            res = wedge_monomials(ma, mb)
            if res is None:
                continue
            sign, m = res
            term = ca * cb
            _accumulate(out, m, term if sign == 1 else -term)
    return clean(out)


def power(a: Form, k: int) -> Form:
    """``a^k`` by repeated wedge (``a^0 = 1``)."""
    out: Form = {(): GaussianRational(1)}
    for _ in range(k):
        out = wedge(out, a)
    return out


class ExteriorAlgebra:
    """Bigraded exterior algebra of complex dimension ``n``."""

    def __init__(self, n: int) -> None:
        self.n = n

    def bidegree(self, m: Monomial) -> Tuple[int, int]:
        p = sum(1 for x in m if x < self.n)
        return p, len(m) - p

    def basis(self, p: int, q: int) -> List[Monomial]:
        return _basis(self.n, p, q)

    def index(self, p: int, q: int) -> Dict[Monomial, int]:
        return _index(self.n, p, q)

    def dims(self) -> Dict[Tuple[int, int], int]:
        return {(p, q): len(self.basis(p, q)) for p in range(self.n + 1) for q in range(self.n + 1)}

    def generator(self, i: int, conjugate: bool = False) -> Form:
        return {((i + self.n) if conjugate else i,): GaussianRational(1)}

    def conjugate(self, form: Form) -> Form:
        """Entrywise conjugation; ``conj(w^I ^ conj(w)^J) = (-1)^{|I||J|} w^J ^ conj(w)^I``."""
        out: Form = {}
        for m, c in form.items():
            hol = [x for x in m if x < self.n]
            anti = [x - self.n for x in m if x >= self.n]
            new = tuple(anti) + tuple(x + self.n for x in hol)
            sign = -1 if (len(hol) * len(anti)) % 2 else 1
            cc = _conj_scalar(c)
            out[new] = cc if sign == 1 else -cc
        return out

    def label(self, m: Monomial, names) -> str:
        if not m:
            return "1"
        parts = [names[x] if x < self.n else names[x - self.n] + "bar" for x in m]
        return "^".join(parts)

    def to_vector(self, form: Form, p: int, q: int, backend: Backend = Backend.EXACT) -> np.ndarray:
        idx = self.index(p, q)
        out = zeros(len(idx), 1, backend)[:, 0]
        for m, c in form.items():
            if m not in idx:
                raise ValueError(f"Monomial {m} is not of type ({p},{q})")
            out[idx[m]] = c if backend == Backend.EXACT else complex(c)
        return out

    def from_vector(self, vec: np.ndarray, p: int, q: int) -> Form:
        basis = self.basis(p, q)
        return clean({basis[i]: vec[i] for i in range(len(basis))})

    def split(self, form: Form) -> Dict[Tuple[int, int], Form]:
        """Decompose a form by bidegree."""
        out: Dict[Tuple[int, int], Form] = {}
        for m, c in form.items():
            out.setdefault(self.bidegree(m), {})[m] = c
        return out

    def wedge_matrix(self, form: Form, p: int, q: int, backend: Backend = Backend.EXACT) -> np.ndarray:
        """Matrix of ``u -> form ^ u`` from ``K^{p,q}`` for a form of pure type (a, b)."""
        types = {self.bidegree(m) for m in form}
        if len(types) > 1:
            raise ValueError("wedge_matrix needs a form of pure type")
        a, b = types.pop() if types else (0, 0)
        src = self.basis(p, q)
        tgt_idx = self.index(p + a, q + b) if p + a <= self.n and q + b <= self.n else {}
        entries: Dict[Tuple[int, int], object] = {}
        for j, mu in enumerate(src):
            for mf, c in form.items():
                res = wedge_monomials(mf, mu)
                if res is None:
                    continue
                sign, m = res
                key = (tgt_idx[m], j)
                term = c if sign == 1 else -c
                entries[key] = entries[key] + term if key in entries else term
        exact = backend == Backend.EXACT and all(isinstance(c, GaussianRational) for c in form.values())
        out = zeros(len(tgt_idx), len(src), Backend.EXACT if exact else Backend.FLOAT)
        for key, c in entries.items():
            out[key] = c if exact else complex(c)
        return out


@lru_cache(maxsize=None)
def _basis(n: int, p: int, q: int) -> List[Monomial]:
    if p < 0 or q < 0 or p > n or q > n:
        return []
    return [
        tuple(i) + tuple(j + n for j in jj)
        for i in combinations(range(n), p)
        for jj in combinations(range(n), q)
    ]


@lru_cache(maxsize=None)
def _index(n: int, p: int, q: int) -> Dict[Monomial, int]:
    return {m: i for i, m in enumerate(_basis(n, p, q))}
