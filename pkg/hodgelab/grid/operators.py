"""Matrix-free operators on grid forms.

Every operator carries its flat adjoint (the adjoint for the identity Gram on
monomials and the plain sum over grid points). Metric adjoints are then
``G^{-1} A^flat G`` pointwise, which is exact for the discrete inner product
whatever the metric field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..errors import DimensionError, TheoremViolationError
from ..linalg import Backend, GramForm
from ..models.forms import Monomial, wedge_monomials
from ..operators import BigradedOperator
from ..utils import child_seeds, get_logger, make_rng
from .complex import Bidegree, GridComplex, GridForm

logger = get_logger(__name__)

FormMap = Callable[[GridForm], GridForm]

ROUNDOFF = 1e-12


def form_add(a: Mapping[Monomial, np.ndarray], b: Mapping[Monomial, np.ndarray], c: complex = 1.0) -> GridForm:
    out: GridForm = dict(a)
    for m, x in b.items():
        out[m] = out[m] + c * x if m in out else c * x
    return out


def form_scale(a: Mapping[Monomial, np.ndarray], c: complex) -> GridForm:
    return {m: c * x for m, x in a.items()}


def form_conj(a: Mapping[Monomial, np.ndarray], n: int) -> GridForm:
    """Complex conjugate of a pure (p,0) or (0,q) form, as a (0,p) or (q,0) form."""
    out: GridForm = {}
    for m, x in a.items():
        if all(i < n for i in m):
            out[tuple(i + n for i in m)] = np.conj(x)
        elif all(i >= n for i in m):
            out[tuple(i - n for i in m)] = np.conj(x)
        else:
            raise DimensionError("form_conj only handles pure holomorphic or antiholomorphic forms")
    return out


def _wedge(form: Mapping[Monomial, np.ndarray], u: Mapping[Monomial, np.ndarray]) -> GridForm:
    out: GridForm = {}
    for mf, f in form.items():
        for mu, x in u.items():
            res = wedge_monomials(mf, mu)
            if res is None:
                continue
            sign, m = res
            term = f * x if sign == 1 else -(f * x)
            out[m] = out[m] + term if m in out else term
    return out


def _wedge_flat_adjoint(form: Mapping[Monomial, np.ndarray], v: Mapping[Monomial, np.ndarray]) -> GridForm:
    out: GridForm = {}
    for mf, f in form.items():
        sf = set(mf)
        for mv, x in v.items():
            if not sf.issubset(mv):
                continue
            mu = tuple(i for i in mv if i not in sf)
            sign, _ = wedge_monomials(mf, mu)
            term = np.conj(f) * x
            term = term if sign == 1 else -term
            out[mu] = out[mu] + term if mu in out else term
    return out


class GridOperator:
    """Linear map on grid forms of a fixed bidegree offset, with its flat adjoint."""

    __slots__ = ("bidegree", "_fn", "_adj", "label")

    def __init__(self, bidegree: Bidegree, fn: FormMap, adj: FormMap, label: str = "") -> None:
        self.bidegree = (int(bidegree[0]), int(bidegree[1]))
        self._fn = fn
        self._adj = adj
        self.label = label

    @property
    def degree(self) -> int:
        return self.bidegree[0] + self.bidegree[1]

    def __call__(self, u: GridForm) -> GridForm:
        return self._fn(u)

    @property
    def flat_adjoint(self) -> "GridOperator":
        return GridOperator((-self.bidegree[0], -self.bidegree[1]), self._adj, self._fn, f"({self.label})^T")

    @classmethod
    def zero(cls, bidegree: Bidegree) -> "GridOperator":
        return cls(bidegree, lambda u: {}, lambda v: {}, "0")

    def _check(self, other: "GridOperator") -> None:
        if self.bidegree != other.bidegree:
            raise DimensionError(f"cannot add operators of bidegree {self.bidegree} and {other.bidegree}")

    def __add__(self, other: "GridOperator") -> "GridOperator":
        self._check(other)
        a, b = self, other
        return GridOperator(
            a.bidegree,
            lambda u: form_add(a(u), b(u)),
            lambda v: form_add(a._adj(v), b._adj(v)),
            f"{a.label} + {b.label}",
        )

    def __neg__(self) -> "GridOperator":
        return self * -1.0

    def __sub__(self, other: "GridOperator") -> "GridOperator":
        return self + (-other)

    def __mul__(self, c: complex) -> "GridOperator":
        a = self
        return GridOperator(
            a.bidegree,
            lambda u: form_scale(a(u), c),
            lambda v: form_scale(a._adj(v), np.conj(c)),
            f"{c}*{a.label}",
        )

    __rmul__ = __mul__

    def __matmul__(self, other: "GridOperator") -> "GridOperator":
        a, b = self, other
        return GridOperator(
            (a.bidegree[0] + b.bidegree[0], a.bidegree[1] + b.bidegree[1]),
            lambda u: a(b(u)),
            lambda v: b._adj(a._adj(v)),
            f"{a.label} {b.label}",
        )

    def __repr__(self) -> str:
        return f"GridOperator({self.label or '?'}, bidegree={self.bidegree})"


def commutator(a: GridOperator, b: GridOperator) -> GridOperator:
    """Graded commutator ``[A, B] = AB - (-1)^{deg A deg B} BA``."""
    sign = -1.0 if (a.degree * b.degree) % 2 else 1.0
    return a @ b - (b @ a) * sign


def metric_adjoint(grid: GridComplex, op: GridOperator) -> GridOperator:
    """``G^{-1} A^flat G``; its own flat adjoint is ``G A G^{-1}``."""
    return GridOperator(
        (-op.bidegree[0], -op.bidegree[1]),
        lambda v: grid.gram_apply(op._adj(grid.gram_apply(v)), inverse=True),
        lambda u: grid.gram_apply(op(grid.gram_apply(u, inverse=True))),
        f"({op.label})*",
    )


def multiply(f: np.ndarray, label: str = "f") -> GridOperator:
    fc = np.conj(f)
    return GridOperator(
        (0, 0),
        lambda u: {m: f * x for m, x in u.items()},
        lambda v: {m: fc * x for m, x in v.items()},
        label,
    )


def wedge_with(form: Mapping[Monomial, np.ndarray], bidegree: Bidegree, label: str = "w") -> GridOperator:
    """``u -> form ^ u`` for a form field of pure type ``bidegree``."""
    form = dict(form)
    return GridOperator(bidegree, lambda u: _wedge(form, u), lambda v: _wedge_flat_adjoint(form, v), f"{label}^")


def contract_with(grid: GridComplex, coeffs: Sequence[np.ndarray], antiholomorphic: bool = False, label: str = "xi") -> GridOperator:
    """Interior product with ``sum_j c_j d/dz_j`` (or ``d/dzbar_j``)."""
    n = grid.n
    offset = n if antiholomorphic else 0
    as_form = {(j + offset,): c for j, c in enumerate(coeffs)}
    conj_form = {m: np.conj(c) for m, c in as_form.items()}
    bidegree = (0, -1) if antiholomorphic else (-1, 0)

    # contraction is the flat adjoint of wedging with the conjugate coefficients
    return GridOperator(
        bidegree,
        lambda u: _wedge_flat_adjoint(conj_form, u),
        lambda v: _wedge(conj_form, v),
        f"{label}_|",
    )


def _directional(grid: GridComplex, directions: Optional[Sequence[int]], anti: bool, label: str) -> GridOperator:
    n = grid.n
    dirs = tuple(range(n)) if directions is None else tuple(directions)
    offset = n if anti else 0
    deriv = grid.d_dzbar if anti else grid.d_dz
    deriv_t = grid.d_dzbar_flat_adjoint if anti else grid.d_dz_flat_adjoint

    def fn(u: GridForm) -> GridForm:
        out: GridForm = {}
        for j in dirs:
            du = {m: deriv(x, j) for m, x in u.items()}
            out = form_add(out, _wedge({(j + offset,): 1.0}, du))
        return out

    def adj(v: GridForm) -> GridForm:
        out: GridForm = {}
        for j in dirs:
            cv = _wedge_flat_adjoint({(j + offset,): 1.0}, v)
            out = form_add(out, {m: deriv_t(x, j) for m, x in cv.items()})
        return out

    return GridOperator((0, 1) if anti else (1, 0), fn, adj, label)


def del_op(grid: GridComplex, directions: Optional[Sequence[int]] = None, label: str = "del") -> GridOperator:
    """``sum_{j in directions} dz_j ^ d/dz_j``."""
    return _directional(grid, directions, False, label)


def dbar_op(grid: GridComplex, directions: Optional[Sequence[int]] = None, label: str = "dbar") -> GridOperator:
    return _directional(grid, directions, True, label)


@dataclass(frozen=True, eq=False)
class MetricOperators:
    """``del``, ``dbar``, ``L``, ``Lambda``, their adjoints and the torsion operators of a grid metric."""

    del_: GridOperator
    dbar: GridOperator
    del_star: GridOperator
    dbar_star: GridOperator
    lefschetz: GridOperator
    dual_lefschetz: GridOperator
    tau: GridOperator
    tau_bar: GridOperator
    tau_star: GridOperator
    tau_bar_star: GridOperator
    t: GridOperator


def metric_operators(grid: GridComplex) -> MetricOperators:
    """Standard operators; the torsion terms vanish identically for a constant metric."""
    d, db = del_op(grid), dbar_op(grid)
    omega = grid.omega()
    lef = wedge_with(omega, (1, 1), "omega")
    lam = metric_adjoint(grid, lef)
    if grid.metric.kind == "constant":
        del_omega: GridForm = {}
        dbar_omega: GridForm = {}
        ddbar_omega: GridForm = {}
    else:
        del_omega = d(omega)
        dbar_omega = db(omega)
        ddbar_omega = d(dbar_omega)
    w_del = wedge_with(del_omega, (2, 1), "del(omega)")
    w_dbar = wedge_with(dbar_omega, (1, 2), "dbar(omega)")
    tau = commutator(lam, w_del)
    tau_bar = commutator(lam, w_dbar)
    curvature = commutator(lam, commutator(lam, wedge_with(form_scale(ddbar_omega, 0.5j), (2, 2), "ddbar(omega)")))
    t = curvature - commutator(w_del, metric_adjoint(grid, w_del))
    return MetricOperators(
        del_=d,
        dbar=db,
        del_star=metric_adjoint(grid, d),
        dbar_star=metric_adjoint(grid, db),
        lefschetz=lef,
        dual_lefschetz=lam,
        tau=tau,
        tau_bar=tau_bar,
        tau_star=metric_adjoint(grid, tau),
        tau_bar_star=metric_adjoint(grid, tau_bar),
        t=t,
    )


def adjoint_defect(grid: GridComplex, op: GridOperator, adj: GridOperator, u: GridForm, v: GridForm) -> float:
    """``|<Au, v> - <u, A* v>|`` relative to ``|Au| |v| + |u| |A* v|``."""
    au, av = op(u), adj(v)
    lhs = grid.inner(au, v) if au else 0.0
    rhs = grid.inner(u, av) if av else 0.0
    scale = grid.norm(au) * grid.norm(v) + grid.norm(u) * grid.norm(av)
    return float(abs(lhs - rhs) / max(scale, 1e-300)) if scale else 0.0


def materialize(grid: GridComplex, op: GridOperator) -> BigradedOperator:
    """Dense blocks of a grid operator; only for tiny grids."""
    a, b = op.bidegree
    blocks: Dict[Bidegree, np.ndarray] = {}
    for (p, q), dim in grid.dims.items():
        if (p + a, q + b) not in grid.dims:
            continue
        cols = []
        for i in range(dim):
            e = np.zeros(dim, dtype=np.complex128)
            e[i] = 1.0
            cols.append(grid.to_vector(op(grid.from_vector(e, p, q)), p + a, q + b))
        blocks[(p, q)] = np.stack(cols, axis=1)

    return BigradedOperator(op.bidegree, grid.dims, blocks, Backend.FLOAT)


def dense_grams(grid: GridComplex) -> Dict[Bidegree, GramForm]:
    """Gram matrices of the discrete inner product on every component."""
    out: Dict[Bidegree, GramForm] = {}
    for (p, q), dim in grid.dims.items():
        cols = []
        for i in range(dim):
            e = np.zeros(dim, dtype=np.complex128)
            e[i] = 1.0
            cols.append(grid.to_vector(grid.gram_apply(grid.from_vector(e, p, q)), p, q))
        g = np.stack(cols, axis=1) * grid.cell_volume
        out[(p, q)] = GramForm(0.5 * (g + g.conj().T))
    return out


# identity evaluation


@dataclass(frozen=True)
class GridIdentity:
    """``lhs = rhs`` as operators, checked on random band-limited forms."""

    identity: str
    lhs: GridOperator
    rhs: GridOperator
    exact: bool
    asserted: bool = True


@dataclass(frozen=True)
class GridIdentityResult:
    identity: str
    residual: float
    exact: bool
    tol: float
    refined_residual: Optional[float] = None
    asserted: bool = True

    @property
    def refinement_ok(self) -> Optional[bool]:
        if self.exact or self.refined_residual is None:
            return None
        return self.refined_residual <= self.residual / 4.0 or self.refined_residual <= ROUNDOFF

    @property
    def ok(self) -> bool:
        if not self.asserted:
            return True
        return self.residual <= self.tol and self.refinement_ok is not False

    def as_dict(self) -> Dict[str, object]:
        return {
            "identity": self.identity,
            "class": "exact" if self.exact else "spectral",
            "residual": self.residual,
            "refined_residual": self.refined_residual,
            "tol": self.tol,
            "asserted": self.asserted,
            "ok": self.ok,
        }


@dataclass
class GridIdentityReport:
    label: str
    size: int
    results: List[GridIdentityResult]
    extras: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results) and all(self.checks.values())

    def residual(self, identity: str) -> float:
        for r in self.results:
            if r.identity == identity:
                return r.residual
        raise KeyError(identity)

    def result(self, identity: str) -> GridIdentityResult:
        for r in self.results:
            if r.identity == identity:
                return r
        raise KeyError(identity)

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "grid": self.size,
            "ok": self.ok,
            "identities": [r.as_dict() for r in self.results],
            "extras": dict(self.extras),
            "checks": dict(self.checks),
        }


def trial_bidegrees(n: int) -> List[Bidegree]:
    return [(p, q) for p in range(n + 1) for q in range(n + 1)]


def evaluate_identities(
    grid: GridComplex,
    identities: Sequence[GridIdentity],
    trials: int,
    seed: int,
    bidegrees: Optional[Sequence[Bidegree]] = None,
) -> Dict[str, float]:
    """Largest relative residual of each identity over ``trials`` random forms.

    Trial ``t`` uses bidegree ``bidegrees[t % len(bidegrees)]``; the forms only
    depend on ``seed``, so two grid sizes see the same continuum test forms.
    """
    keys = list(bidegrees) if bidegrees else trial_bidegrees(grid.n)
    worst = {ident.identity: 0.0 for ident in identities}
    for t, s in enumerate(child_seeds(seed, trials)):
        p, q = keys[t % len(keys)]
        u = grid.random_form(make_rng(s), p, q)
        scale_u = grid.norm(u)
        if scale_u == 0.0:
            continue
        u = form_scale(u, 1.0 / scale_u)
        for ident in identities:
            lhs, rhs = ident.lhs(u), ident.rhs(u)
            diff = grid.norm(form_add(lhs, rhs, -1.0))
            denom = max(grid.norm(lhs), grid.norm(rhs), 1.0)
            worst[ident.identity] = max(worst[ident.identity], diff / denom)
    return worst


def identity_results(
    grid: GridComplex,
    builder: Callable[[GridComplex], Sequence[GridIdentity]],
    trials: int,
    seed: int,
    exact_tol: float,
    spectral_tol: float,
    refine: bool = True,
    bidegrees: Optional[Sequence[Bidegree]] = None,
) -> List[GridIdentityResult]:
    """Evaluate a family of identities and refine the spectral ones on a grid twice as fine.

    Raises:
        TheoremViolationError: if an asserted identity of the exact class fails
    """
    identities = builder(grid)
    residuals = evaluate_identities(grid, identities, trials, seed, bidegrees)
    refined: Dict[str, float] = {}
    spectral = [i.identity for i in identities if not i.exact]
    if refine and spectral:
        fine = grid.refined()
        fine_identities = [i for i in builder(fine) if i.identity in spectral]
        refined = evaluate_identities(fine, fine_identities, trials, seed, bidegrees)
    results: List[GridIdentityResult] = []
    for ident in identities:
        res = GridIdentityResult(
            identity=ident.identity,
            residual=residuals[ident.identity],
            exact=ident.exact,
            tol=exact_tol if ident.exact else spectral_tol,
            refined_residual=refined.get(ident.identity),
            asserted=ident.asserted,
        )
        logger.debug("%s residual %.3e (%s)", res.identity, res.residual, "exact" if res.exact else "spectral")
        if res.exact and res.asserted and res.residual > res.tol:
            raise TheoremViolationError(
                f"{ident.identity}: residual {res.residual:.3e} above {res.tol:.1e} on a grid of size {grid.size}"
            )
        results.append(res)
    return results
