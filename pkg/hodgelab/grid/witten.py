"""Witten-twisted operators ``del_phi = del - del(phi)^`` and their identities on the grid.

The twisted differentials are only ever evaluated in expanded form, including
the dense decomposition check that materializes the whole grid space.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import AliasingRiskError, ConventionError, InputError, PreconditionError, TheoremViolationError
from ..hodge import Decomposition, harmonic_basis, three_space
from ..linalg import DEFAULT_POLICY, RankPolicy
from ..models.structure import WittenTerm
from ..utils import child_seeds, get_logger, make_rng
from .complex import Bidegree, GridComplex, GridForm
from .operators import (
    ROUNDOFF,
    GridIdentity,
    GridIdentityReport,
    GridOperator,
    MetricOperators,
    adjoint_defect,
    commutator,
    contract_with,
    del_op,
    dbar_op,
    dense_grams,
    identity_results,
    materialize,
    metric_adjoint,
    metric_operators,
    multiply,
    wedge_with,
)

logger = get_logger(__name__)

WITTEN_IDENTITY_IDS = (
    "INT1", "INT2", "INT3",
    "ADJ_A", "ADJ_B", "ADJ_C", "ADJ_D", "ADJ_E", "ADJ_F",
    "WL1", "WL2",
    "WC1", "WC2", "WC3", "WC4",
    "WBKN1", "WBKN2",
    "CL1", "CL2", "CDL",
)  # fmt: skip

# identities that are pointwise algebra or need only unaliased products of phi
_EXACT_FOR_ANY_METRIC = {"INT1", "INT2", "INT3", "ADJ_A", "ADJ_B", "ADJ_E", "ADJ_F", "WL1", "WL2", "CL2", "CDL"}

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_TERM = re.compile(rf"^(?:(?P<coef>{_NUMBER})\s*\*\s*)?(?P<func>cos|sin)\s*\((?P<arg>[^()]*)\)$")
_VAR = re.compile(r"^(?:(?P<mult>\d+)\s*\*\s*)?(?P<axis>[xy])(?P<index>\d+)$")


def _signed_parts(text: str) -> List[Tuple[int, str]]:
    """Split on top-level ``+``/``-``, keeping the sign of every part."""
    parts: List[Tuple[int, str]] = []
    depth, sign, start = 0, 1, 0
    text = text.strip()
    if text[:1] in "+-":
        sign = -1 if text[0] == "-" else 1
        start = 1
    i = start
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and not re.search(r"[eE]$", text[start:i]):
            parts.append((sign, text[start:i].strip()))
            sign = -1 if ch == "-" else 1
            start = i + 1
        i += 1
    parts.append((sign, text[start:].strip()))
    return parts


def parse_phi(text: str, n: int) -> Tuple[WittenTerm, ...]:
    """Parse ``cos(x1)+0.5*sin(y1-2*x2)``: real multiples of cos/sin of integer combinations of ``x_j, y_j``.

    Each term becomes ``c exp(i k.x)`` with the real part understood, so
    ``a cos`` gives ``c = a`` and ``a sin`` gives ``c = -i a``.

    Raises:
        InputError: on anything outside the grammar or a coordinate index above ``n``
    """
    if not text or not text.strip():
        return ()
    terms: List[WittenTerm] = []
    for sign, part in _signed_parts(text):
        m = _TERM.match(part)
        if not m:
            raise InputError(f"cannot parse weight term {part!r} in {text!r}")
        coef = sign * float(m.group("coef") or 1.0)
        k = [0] * (2 * n)
        for vsign, var in _signed_parts(m.group("arg")):
            vm = _VAR.match(var)
            if not vm:
                raise InputError(f"cannot parse coordinate {var!r} in {part!r}")
            index = int(vm.group("index"))
            if not 1 <= index <= n:
                raise InputError(f"coordinate {var!r} outside complex dimension {n}")
            axis = 2 * (index - 1) + (0 if vm.group("axis") == "x" else 1)
            k[axis] += vsign * int(vm.group("mult") or 1)
        c = complex(coef) if m.group("func") == "cos" else complex(0.0, -coef)
        terms.append(WittenTerm(tuple(k), c))
    return tuple(terms)


def phi_band(terms: Sequence[WittenTerm]) -> int:
    return max((max((abs(x) for x in t.k), default=0) for t in terms), default=0)


@dataclass(frozen=True, eq=False)
class WittenData:
    """The weight ``phi`` and everything derived from it pointwise."""

    terms: Tuple[WittenTerm, ...]
    phi: np.ndarray = field(repr=False)
    del_phi: GridForm = field(repr=False)
    dbar_phi: GridForm = field(repr=False)
    ddbar_phi: GridForm = field(repr=False)
    xi: Tuple[np.ndarray, ...] = field(repr=False)
    norm_sq: np.ndarray = field(repr=False)
    defining_residual: float = 0.0
    index_residual: float = 0.0
    pairing_residual: float = 0.0


def _rel(diff: float, scale: float) -> float:
    return diff / max(scale, 1.0)


def witten_data(grid: GridComplex, terms: Sequence[WittenTerm], tol: float = 1e-12) -> WittenData:
    """``phi``, its derivatives and ``xi`` solving ``xi _| omega = dbar(phi)`` at every point.

    Raises:
        AliasingRiskError: if ``phi`` has modes outside the coefficient band
        ConventionError: if ``xi`` misses its defining equation or
            ``i xi _| del(phi) = |del(phi)|^2`` fails
    """
    terms = tuple(terms)
    n = grid.n
    band = phi_band(terms)
    if band > grid.bands[1]:
        raise AliasingRiskError(f"weight has Fourier modes up to {band}, above f_coeff={grid.bands[1]}")
    phi = grid.trig_field(terms)
    c = [grid.d_dz(phi, j) for j in range(n)]
    g = [grid.d_dzbar(phi, j) for j in range(n)]
    del_phi = {(j,): c[j] for j in range(n)}
    dbar_phi = {(n + j,): g[j] for j in range(n)}
    ddbar_phi = del_op(grid)(dbar_phi)

    # i sum_j xi_j conj(hinv)_{jk} = d(phi)/dzbar_k, solved point by point
    a = np.empty(grid.shape + (n, n), dtype=np.complex128)
    for j in range(n):
        for k in range(n):
            a[..., k, j] = 1j * np.conj(grid.hinv(j, k))
    rhs = np.stack(g, axis=-1)
    xi_stack = np.linalg.solve(a, rhs[..., None])[..., 0]
    xi = tuple(xi_stack[..., j] for j in range(n))

    scale = max((float(np.max(np.abs(x))) for x in g), default=0.0)
    contracted = contract_with(grid, xi)(grid.omega())
    defining = max((float(np.max(np.abs(contracted.get((n + k,), 0.0) - g[k]))) for k in range(n)), default=0.0)
    index_form = [-1j * sum(np.conj(grid.h(l, r)) * g[l] for l in range(n)) for r in range(n)]
    index = max((float(np.max(np.abs(index_form[r] - xi[r]))) for r in range(n)), default=0.0)

    norm_sq = np.real(sum(grid.h(j, l) * c[j] * np.conj(c[l]) for j in range(n) for l in range(n)))
    pairing_field = 1j * sum(xi[j] * c[j] for j in range(n))
    pairing = float(np.max(np.abs(pairing_field - norm_sq)))
    norm_scale = float(np.max(np.abs(norm_sq)))

    data = WittenData(
        terms=terms,
        phi=phi,
        del_phi=del_phi,
        dbar_phi=dbar_phi,
        ddbar_phi=ddbar_phi,
        xi=xi,
        norm_sq=norm_sq,
        defining_residual=_rel(defining, scale),
        index_residual=_rel(index, scale),
        pairing_residual=_rel(pairing, norm_scale),
    )
    if data.defining_residual > tol:
        raise ConventionError(f"xi misses xi _| omega = dbar(phi) by {data.defining_residual:.3e}")
    if data.pairing_residual > tol:
        raise ConventionError(f"i xi _| del(phi) differs from |del(phi)|^2 by {data.pairing_residual:.3e}")
    return data


@dataclass(frozen=True, eq=False)
class WittenOperators:
    data: WittenData
    base: MetricOperators
    wedge_del_phi: GridOperator
    wedge_dbar_phi: GridOperator
    xi: GridOperator
    xi_bar: GridOperator
    del_phi: GridOperator
    dbar_phi: GridOperator
    del_phi_star: GridOperator
    dbar_phi_star: GridOperator
    lie: GridOperator
    lie_bar: GridOperator
    lap_del: GridOperator
    lap_dbar: GridOperator
    norm_sq: GridOperator


def witten_operators(grid: GridComplex, terms: Sequence[WittenTerm]) -> WittenOperators:
    """Twisted differentials, their adjoints, the (1,0) and (0,1) Lie derivatives and the Witten Laplacians."""
    data = witten_data(grid, terms)
    base = metric_operators(grid)
    wd = wedge_with(data.del_phi, (1, 0), "del(phi)")
    wdb = wedge_with(data.dbar_phi, (0, 1), "dbar(phi)")
    xi = contract_with(grid, data.xi, label="xi")
    xi_bar = contract_with(grid, [np.conj(x) for x in data.xi], antiholomorphic=True, label="xibar")
    del_t = base.del_ - wd
    dbar_t = base.dbar - wdb
    del_t_star = metric_adjoint(grid, del_t)
    dbar_t_star = metric_adjoint(grid, dbar_t)
    return WittenOperators(
        data=data,
        base=base,
        wedge_del_phi=wd,
        wedge_dbar_phi=wdb,
        xi=xi,
        xi_bar=xi_bar,
        del_phi=del_t,
        dbar_phi=dbar_t,
        del_phi_star=del_t_star,
        dbar_phi_star=dbar_t_star,
        lie=commutator(xi, base.del_),
        lie_bar=commutator(xi_bar, base.dbar),
        lap_del=commutator(del_t, del_t_star),
        lap_dbar=commutator(dbar_t, dbar_t_star),
        norm_sq=multiply(data.norm_sq, "|del(phi)|^2"),
    )


def _witten_identities(grid: GridComplex, terms: Sequence[WittenTerm]) -> List[GridIdentity]:
    w = witten_operators(grid, terms)
    b = w.base
    i = 1j
    phi = multiply(w.data.phi, "phi")
    lam, lef = b.dual_lefschetz, b.lefschetz
    lap_del = commutator(b.del_, b.del_star)
    lap_dbar = commutator(b.dbar, b.dbar_star)
    twisted_del_tau = b.del_ + b.tau + w.wedge_del_phi
    ddbar = wedge_with({m: i * x for m, x in w.data.ddbar_phi.items()}, (1, 1), "i ddbar(phi)")
    zero = GridOperator.zero

    pairs = [
        ("INT1", w.del_phi @ w.del_phi, zero((2, 0))),
        ("INT2", w.dbar_phi @ w.dbar_phi, zero((0, 2))),
        ("INT3", commutator(w.del_phi, w.dbar_phi), zero((1, 1))),
        ("ADJ_A", metric_adjoint(grid, w.wedge_del_phi), w.xi * i),
        ("ADJ_B", metric_adjoint(grid, w.wedge_dbar_phi), w.xi_bar * -i),
        ("ADJ_C", b.del_star @ phi, phi @ b.del_star - w.xi * i),
        ("ADJ_D", b.dbar_star @ phi, phi @ b.dbar_star + w.xi_bar * i),
        ("ADJ_E", b.del_ @ w.xi, w.lie - w.xi @ b.del_),
        ("ADJ_F", b.dbar @ w.xi_bar, w.lie_bar - w.xi_bar @ b.dbar),
        ("WL1", w.lap_del, lap_del - w.lie * i - metric_adjoint(grid, w.lie * i) + w.norm_sq),
        ("WL2", w.lap_dbar, lap_dbar + w.lie_bar * i + metric_adjoint(grid, w.lie_bar * i) + w.norm_sq),
        ("WC1", commutator(lam, w.dbar_phi), (b.del_star + b.tau_star + w.xi * i) * -i),
        ("WC2", commutator(lam, w.del_phi), (b.dbar_star + b.tau_bar_star - w.xi_bar * i) * i),
        ("WC3", commutator(w.dbar_phi_star, lef), (b.del_ + b.tau + w.wedge_del_phi) * i),
        ("WC4", commutator(w.del_phi_star, lef), (b.dbar + b.tau_bar + w.wedge_dbar_phi) * -i),
        (
            "WBKN1",
            w.lap_dbar,
            w.lap_del
            + commutator(w.del_phi, b.tau_star)
            - commutator(w.dbar_phi, b.tau_bar_star)
            + commutator(w.del_phi, w.xi * i) * 2
            + commutator(w.dbar_phi, w.xi_bar * i) * 2,
        ),
        (
            "WBKN2",
            w.lap_dbar,
            commutator(twisted_del_tau, metric_adjoint(grid, twisted_del_tau)) - commutator(ddbar, lam) * 2 + b.t,
        ),
        ("CL1", commutator(w.wedge_dbar_phi, b.tau_bar_star) - commutator(b.tau, w.xi * i), zero((0, 0))),
        ("CL2", lam @ w.wedge_dbar_phi, w.wedge_dbar_phi @ lam - w.xi),
        ("CDL", commutator(w.wedge_dbar_phi, lam), w.xi),
    ]
    constant = grid.metric.kind == "constant"
    return [GridIdentity(name, lhs, rhs, exact=constant or name in _EXACT_FOR_ANY_METRIC) for name, lhs, rhs in pairs]


def witten_identity_suite(
    grid: GridComplex,
    terms: Sequence[WittenTerm],
    trials: int = 20,
    seed: int = 0,
    refine: bool = True,
    exact_tol: float = 1e-10,
    spectral_tol: float = 1e-6,
) -> GridIdentityReport:
    """Evaluate every twisted identity on ``trials`` random band-limited forms.

    Exact-class identities (all of them on a constant metric) must hold to
    ``exact_tol``; spectral-class ones to ``spectral_tol`` and must shrink at
    least fourfold on a grid twice as fine.

    Raises:
        PreconditionError: if ``trials`` is not positive
        TheoremViolationError: if an exact-class identity fails
    """
    if trials < 1:
        raise PreconditionError(f"trials must be positive, got {trials}")
    terms = tuple(terms)
    results = identity_results(
        grid,
        lambda g: _witten_identities(g, terms),
        trials,
        seed,
        exact_tol,
        spectral_tol,
        refine=refine,
    )

    data = witten_data(grid, terms)
    w = witten_operators(grid, terms)
    s1, s2 = list(child_seeds(seed + 1, 2))
    u = grid.random_form(make_rng(s1), 0, 0)
    d_defect = adjoint_defect(grid, w.base.del_, w.base.del_star, u, grid.random_form(make_rng(s2), 1, 0))
    dbar_defect = adjoint_defect(grid, w.dbar_phi, w.dbar_phi_star, u, grid.random_form(make_rng(s2), 0, 1))
    extras = {
        "xi_defining": data.defining_residual,
        "xi_index": data.index_residual,
        "xi_pairing": data.pairing_residual,
        "adjoint_del": d_defect,
        "adjoint_dbar_phi": dbar_defect,
    }
    checks = {
        "xi_index_formula": data.index_residual <= 1e-10,
        "adjoint_exact": max(d_defect, dbar_defect) <= ROUNDOFF,
    }
    report = GridIdentityReport(f"witten n={grid.n}", grid.size, results, extras, checks)
    logger.info(
        "Witten suite on %s grid n=%d size=%d: %d identities, ok=%s",
        grid.metric.kind,
        grid.n,
        grid.size,
        len(results),
        report.ok,
    )
    return report


@dataclass(frozen=True)
class WittenDecompositionEntry:
    operator: str
    bidegree: Bidegree
    kernel_dim: int
    full: Decomposition
    closed: Decomposition

    def ok(self, tol: float) -> bool:
        return self.full.holds(tol) and self.closed.holds(tol)


@dataclass
class WittenDecompositionReport:
    size: int
    entries: List[WittenDecompositionEntry]
    tol: float

    @property
    def ok(self) -> bool:
        return all(e.ok(self.tol) for e in self.entries)

    def kernel_dims(self, operator: str = "dbar_phi") -> Dict[Bidegree, int]:
        return {e.bidegree: e.kernel_dim for e in self.entries if e.operator == operator}

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "grid": self.size,
            "ok": self.ok,
            "entries": [
                {
                    "operator": e.operator,
                    "bidegree": list(e.bidegree),
                    "kernel_dim": e.kernel_dim,
                    "dims": list(e.full.dims),
                    "ambient": e.full.ambient,
                    "orthogonality": e.full.orthogonality,
                    "closed_ok": e.closed.holds(self.tol),
                }
                for e in self.entries
            ],
        }


def witten_hodge_decomposition_check(
    grid: GridComplex,
    terms: Sequence[WittenTerm],
    tol: float = 1e-9,
    harmonic_rel: float = 1e-9,
    policy: RankPolicy = DEFAULT_POLICY,
) -> WittenDecompositionReport:
    """Three-space decompositions for ``Lap''_phi`` and ``Lap'_phi`` with dense operators.

    Both twisted operators are taken in expanded form, ``dbar - dbar(phi)^``
    and ``del - del(phi)^``.

    Raises:
        PreconditionError: unless ``n == 1`` and the grid has at most 8 points per axis
        TheoremViolationError: if a decomposition fails
    """
    if grid.n != 1 or grid.size > 8:
        raise PreconditionError(f"dense decomposition needs n = 1 and at most 8 points per axis, got n={grid.n}, size={grid.size}")
    data = witten_data(grid, terms)
    d, db = del_op(grid), dbar_op(grid)
    ops = {
        "dbar_phi": db - wedge_with(data.dbar_phi, (0, 1)),
        "del_phi": d - wedge_with(data.del_phi, (1, 0)),
    }
    grams = dense_grams(grid)
    entries: List[WittenDecompositionEntry] = []
    for name, op in ops.items():
        dense = materialize(grid, op)
        dense_star = dense.adjoint(grams)
        lap = dense @ dense_star + dense_star @ dense
        for key in sorted(grid.dims):
            kernel = harmonic_basis(lap, grams, key, harmonic_rel)
            full, closed = three_space(grid, {key: kernel}, dense, dense_star, grams, key, policy)
            entry = WittenDecompositionEntry(name, key, kernel.shape[1], full, closed)
            if not entry.ok(tol):
                raise TheoremViolationError(
                    f"{name} at {key}: decomposition dims {full.dims} of {full.ambient}, "
                    f"orthogonality defect {full.orthogonality:.3e}"
                )
            entries.append(entry)
    logger.info("Witten decomposition holds on %d components", len(entries))
    return WittenDecompositionReport(grid.size, entries, tol)
