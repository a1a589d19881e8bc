"""Double complexes generated by structure equations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import IntegrabilityError
from ..linalg import Backend, conj, is_zero, matmul, zeros
from ..operators import BigradedOperator, Bidegree
from ..utils import get_logger
from .forms import ExteriorAlgebra, Form, Monomial, add, clean, wedge
from .structure import StructureEquations

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class DoubleComplex:
    """Bounded first-quadrant double complex ``(K^{p,q}, d1, d2)``.

    ``d1`` has bidegree (1,0) and ``d2`` bidegree (0,1); for the Frölicher
    complex these are the del and del-bar operators.
    """

    dims: Dict[Bidegree, int]
    d1: BigradedOperator
    d2: BigradedOperator
    label: str = "complex"
    n: int = 0
    bases: Optional[Dict[Bidegree, List[Monomial]]] = None
    equations: Optional[StructureEquations] = None
    algebra: Optional[ExteriorAlgebra] = field(default=None, repr=False)

    @property
    def backend(self) -> Backend:
        return self.d1.backend

    @property
    def p_max(self) -> int:
        return max(p for p, _ in self.dims)

    @property
    def q_max(self) -> int:
        return max(q for _, q in self.dims)

    def components(self) -> List[Bidegree]:
        return sorted(self.dims)

    def dim(self, p: int, q: int) -> int:
        return self.dims.get((p, q), 0)

    def total_degrees(self) -> range:
        return range(self.p_max + self.q_max + 1)

    def to_float(self) -> "DoubleComplex":
        if self.backend == Backend.FLOAT:
            return self
        return DoubleComplex(
            self.dims,
            self.d1.to_float(),
            self.d2.to_float(),
            self.label,
            self.n,
            self.bases,
            self.equations,
            self.algebra,
        )

    def check_invariants(self, tol: float = 0.0) -> None:
        """``d1^2 = 0``, ``d2^2 = 0`` and ``d1 d2 + d2 d1 = 0`` on every component."""
        checks = (
            ("d1^2", self.d1 @ self.d1),
            ("d2^2", self.d2 @ self.d2),
            ("d1 d2 + d2 d1", self.d1 @ self.d2 + self.d2 @ self.d1),
        )
        for name, op in checks:
            for key, m in op.blocks():
                if not is_zero(m, tol):
                    raise IntegrabilityError(f"{self.label}: {name} is nonzero on K^{key}")

    def has_conjugation_symmetry(self) -> bool:
        """Whether d2 on K^{q,p} is the basis conjugate of d1 on K^{p,q} everywhere."""
        if self.algebra is None:
            raise ValueError("Conjugation symmetry needs the exterior algebra of the model")
        for p, q in self.components():
            if (p + 1, q) not in self.dims:
                continue
            lhs = matmul(conjugation_matrix(self.algebra, p + 1, q, self.backend), conj(self.d1.block(p, q)))
            rhs = matmul(self.d2.block(q, p), conjugation_matrix(self.algebra, p, q, self.backend))
            if not is_zero(lhs - rhs, 1e-12):
                return False
        return True


def conjugation_matrix(alg: ExteriorAlgebra, p: int, q: int, backend: Backend = Backend.EXACT) -> np.ndarray:
    """Signed permutation taking coefficients in K^{p,q} to those of the conjugate form in K^{q,p}."""
    src = alg.basis(p, q)
    tgt = alg.index(q, p)
    out = zeros(len(tgt), len(src), backend)
    one = 1 if backend == Backend.EXACT else 1.0
    for j, m in enumerate(src):
        (mc, c), = alg.conjugate({m: one}).items()
        out[tgt[mc], j] = c
    return out


def _generator_differentials(eq: StructureEquations, alg: ExteriorAlgebra) -> List[Form]:
    n = eq.n
    d_gen: List[Form] = []
    for i in range(n):
        form: Form = {}
        for (j, k), c in eq.d20.get(i, {}).items():
            form = add(form, {(j, k): c})
        for (j, k), c in eq.d11.get(i, {}).items():
            form = add(form, {(j, k + n): c})
        d_gen.append(form)
    d_gen.extend(alg.conjugate(f) for f in list(d_gen))
    return d_gen


def _d_monomial(m: Monomial, d_gen: List[Form]) -> Form:
    """Graded Leibniz rule on a monomial of one-forms."""
    out: Form = {}
    for t, g in enumerate(m):
        term = wedge(wedge({m[:t]: 1}, d_gen[g]), {m[t + 1:]: 1})
        out = add(out, term, sign=-1 if t % 2 else 1)
    return out


def _d_form(form: Form, d_gen: List[Form]) -> Form:
    out: Form = {}
    for m, c in form.items():
        out = add(out, {k: v * c for k, v in _d_monomial(m, d_gen).items()})
    return out


def build_double_complex(eq: StructureEquations, backend: Backend = Backend.EXACT) -> DoubleComplex:
    """Frölicher double complex ``(K^{p,q}, del, del-bar)`` of invariant forms."""
    n = eq.n
    alg = ExteriorAlgebra(n)
    d_gen = _generator_differentials(eq, alg)

    for i in range(n):
        dd = _d_form(d_gen[i], d_gen)
        if dd:
            first = min(dd)
            raise IntegrabilityError(
                f"{eq.label}: d^2 {eq.names[i]} != 0 (coefficient {dd[first]} on "
                f"{alg.label(first, eq.names)}); the structure equations violate the Jacobi identity"
            )

    dims = alg.dims()
    del_blocks: Dict[Bidegree, np.ndarray] = {}
    dbar_blocks: Dict[Bidegree, np.ndarray] = {}
    for (p, q) in dims:
        src = alg.basis(p, q)
        del_idx = alg.index(p + 1, q) if p < n else {}
        dbar_idx = alg.index(p, q + 1) if q < n else {}
        dm = zeros(len(del_idx), len(src), Backend.EXACT)
        dbm = zeros(len(dbar_idx), len(src), Backend.EXACT)
        for j, m in enumerate(src):
            for mt, c in _d_monomial(m, d_gen).items():
                if mt in del_idx:
                    dm[del_idx[mt], j] = c
                elif mt in dbar_idx:
                    dbm[dbar_idx[mt], j] = c
                else:
                    raise IntegrabilityError(
                        f"{eq.label}: d{alg.label(m, eq.names)} has a term of unexpected type"
                    )
        if not is_zero(dm):
            del_blocks[(p, q)] = dm
        if not is_zero(dbm):
            dbar_blocks[(p, q)] = dbm

    k = DoubleComplex(
        dims=dims,
        d1=BigradedOperator((1, 0), dims, del_blocks, Backend.EXACT),
        d2=BigradedOperator((0, 1), dims, dbar_blocks, Backend.EXACT),
        label=eq.label,
        n=n,
        bases={key: alg.basis(*key) for key in dims},
        equations=eq,
        algebra=alg,
    )
    k.check_invariants()
    logger.debug("Built double complex %s (n=%d, %d nonzero structure constants)", eq.label, n, eq.coefficient_count())
    return k.to_float() if backend == Backend.FLOAT else k


def apply_d(k: DoubleComplex, form: Form) -> Tuple[Form, Form]:
    """``(del form, del-bar form)`` for a form of the model, computed from the generators."""
    if k.equations is None or k.algebra is None:
        raise ValueError("apply_d needs a complex built from structure equations")
    alg = k.algebra
    d_gen = _generator_differentials(k.equations, alg)
    parts_del: Form = {}
    parts_dbar: Form = {}
    for m, c in form.items():
        p = alg.bidegree(m)[0]
        for mt, v in _d_monomial(m, d_gen).items():
            target = parts_del if alg.bidegree(mt)[0] == p + 1 else parts_dbar
            target[mt] = target[mt] + v * c if mt in target else v * c
    return clean(parts_del), clean(parts_dbar)
