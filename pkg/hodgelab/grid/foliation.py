"""Coordinate-level foliation lemmas on the grid, for a product metric on ``C^r x C^(n-r)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import PreconditionError, ProductMetricError
from ..utils import get_logger, make_rng
from .complex import Bidegree, GridComplex, MetricSpec, build_grid, bundle_like_metric
from .operators import (
    GridIdentity,
    GridIdentityReport,
    GridOperator,
    commutator,
    contract_with,
    dbar_op,
    del_op,
    evaluate_identities,
    form_conj,
    form_scale,
    identity_results,
    metric_adjoint,
    wedge_with,
)

logger = get_logger(__name__)

FOLIATION_IDENTITY_IDS = ("DZ", "XIC", "LNF", "NFC", "FDB", "ANC", "ANC_ADJ")
CONTROL_IDS = ("LNF", "ANC")
CONTROL_FLOOR = 1e-3


@dataclass(frozen=True)
class MetricStructure:
    """How a grid metric sits over the partition ``N = {0..r-1}``, ``F = {r..n-1}``."""

    product: bool
    bundle_like: bool
    kahler_n: bool

    def as_dict(self) -> Dict[str, bool]:
        return {"product": self.product, "bundle_like": self.bundle_like, "del_n_omega_n_zero": self.kahler_n}


def metric_structure(metric: MetricSpec, r: int) -> MetricStructure:
    n = metric.n
    if not 1 <= r < n:
        raise PreconditionError(f"partition r={r} must satisfy 1 <= r < n={n}")
    mats = [np.asarray(metric.base)] + [np.asarray(t.matrix) for t in metric.terms]
    product = all(not np.any(m[:r, r:]) and not np.any(m[r:, :r]) for m in mats)
    n_axes, f_axes = set(range(2 * r)), set(range(2 * r, 2 * n))
    bundle_like = True
    n_varies = False
    for t in metric.terms:
        m = np.asarray(t.matrix)
        axes = {i for i, kk in enumerate(t.k) if kk}
        if np.any(m[:r, :r]):
            n_varies = True
            bundle_like &= axes <= n_axes
        if np.any(m[r:, r:]):
            bundle_like &= axes <= f_axes
    # omega_N = f dz1 ^ dzbar1 is always del_N-closed
    return MetricStructure(product, bundle_like, r == 1 or not n_varies)


@dataclass
class FoliationGridReport(GridIdentityReport):
    structure: Optional[MetricStructure] = None
    control: Dict[str, float] = field(default_factory=dict)

    @property
    def summary(self) -> Dict[str, object]:
        out = dict(super().summary)
        out["structure"] = self.structure.as_dict() if self.structure else {}
        out["control"] = dict(self.control)
        return out


def default_bidegrees(n: int) -> List[Bidegree]:
    # Lambda_N kills forms without a dz_l ^ dzbar_l pair, so lead with (1,1)
    wanted = [(1, 1), (1, 0), (0, 1), (2, 1), (1, 2)]
    return [(p, q) for p, q in wanted if p <= n and q <= n]


def _foliation_identities(grid: GridComplex, r: int, structure: MetricStructure, xi_seed: int) -> List[GridIdentity]:
    n = grid.n
    n_dirs, f_dirs = tuple(range(r)), tuple(range(r, n))
    del_n, del_f = del_op(grid, n_dirs, "del_N"), del_op(grid, f_dirs, "del_F")
    dbar_n = dbar_op(grid, n_dirs, "dbar_N")
    omega_n = grid.omega(n_dirs)
    lam_n = metric_adjoint(grid, wedge_with(omega_n, (1, 1), "omega_N"))
    constant = grid.metric.kind == "constant"

    # (dz_l ^)* = sum over the block of l of h_{kl} d/dz_k _|, weighted by l+1 so that every l counts
    dz_lhs = GridOperator.zero((-1, 0))
    dz_rhs = GridOperator.zero((-1, 0))
    for l in range(n):
        block = n_dirs if l < r else f_dirs
        dz_lhs = dz_lhs + metric_adjoint(grid, wedge_with({(l,): 1.0}, (1, 0), f"dz{l}")) * float(l + 1)
        coeffs = [grid.h(k, l) if k in block else np.zeros(grid.shape) for k in range(n)]
        dz_rhs = dz_rhs + contract_with(grid, coeffs, label=f"dz{l}*") * float(l + 1)

    xi = grid.random_vector_field(make_rng(xi_seed), band=grid.bands[1])
    contract = contract_with(grid, xi)
    alpha = contract(grid.omega())
    alpha_bar = wedge_with(form_scale(form_conj(alpha, n), 1j), (1, 0), "i alphabar")

    dbar_n_omega_n = {} if constant else dbar_n(omega_n)
    tau_bar_n = commutator(lam_n, wedge_with(dbar_n_omega_n, (1, 2), "dbar_N(omega_N)"))
    dbar_n_star = metric_adjoint(grid, dbar_n)
    hypotheses = structure.bundle_like and structure.kahler_n
    lnf_exact = constant or grid.metric.kind == "inverse-band-limited"
    zero = GridOperator.zero
    return [
        GridIdentity("DZ", dz_lhs, dz_rhs, exact=True),
        GridIdentity("XIC", metric_adjoint(grid, contract), alpha_bar, exact=True),
        GridIdentity("LNF", commutator(lam_n, del_f), zero((0, -1)), exact=lnf_exact, asserted=structure.bundle_like),
        GridIdentity(
            "NFC",
            commutator(lam_n, del_n),
            (dbar_n_star + metric_adjoint(grid, tau_bar_n)) * 1j,
            exact=constant,
            asserted=structure.kahler_n,
        ),
        GridIdentity("FDB", commutator(del_f, dbar_n), zero((1, 1)), exact=True),
        GridIdentity("ANC", commutator(del_n, metric_adjoint(grid, del_f)), zero((0, 0)), exact=constant, asserted=hypotheses),
        GridIdentity("ANC_ADJ", commutator(del_f, metric_adjoint(grid, del_n)), zero((0, 0)), exact=constant, asserted=hypotheses),
    ]


def control_residuals(
    n: int,
    size: int,
    r: int,
    bands=(1, 1),
    trials: int = 4,
    seed: int = 0,
    amplitude: float = 0.5,
) -> Dict[str, float]:
    """LNF and ANC residuals for the swapped, non-bundle-like metric; they should stay well away from zero."""
    spec = bundle_like_metric(n, r, amplitude=amplitude, control=True)
    grid = build_grid(n, size, spec, bands)
    structure = metric_structure(spec, r)
    identities = [i for i in _foliation_identities(grid, r, structure, seed + 7) if i.identity in CONTROL_IDS]
    return evaluate_identities(grid, identities, trials, seed, default_bidegrees(n))


def foliation_grid_suite(
    grid: GridComplex,
    r: int,
    trials: int = 4,
    seed: int = 0,
    refine: bool = True,
    control: bool = True,
    exact_tol: float = 1e-10,
    spectral_tol: float = 1e-6,
    bidegrees: Optional[Sequence[Bidegree]] = None,
) -> FoliationGridReport:
    """Evaluate the N/F coordinate lemmas on a product metric.

    LNF needs a bundle-like metric and ANC additionally ``del_N omega_N = 0``;
    without these hypotheses they are reported but not asserted. NFC is only
    asserted in the ``del_N omega_N = 0`` case.

    Raises:
        ProductMetricError: if the metric is not block-diagonal on the partition
        TheoremViolationError: if an asserted exact-class identity fails
    """
    if trials < 1:
        raise PreconditionError(f"trials must be positive, got {trials}")
    structure = metric_structure(grid.metric, r)
    if not structure.product:
        raise ProductMetricError(f"metric is not block-diagonal for the partition {r} | {grid.n - r}")
    if not structure.bundle_like:
        logger.warning("metric is not bundle-like for r=%d; LNF and ANC are reported only", r)
    keys = list(bidegrees) if bidegrees else default_bidegrees(grid.n)
    results = identity_results(
        grid,
        lambda g: _foliation_identities(g, r, structure, seed + 7),
        trials,
        seed,
        exact_tol,
        spectral_tol,
        refine=refine,
        bidegrees=keys,
    )
    report = FoliationGridReport(f"foliation n={grid.n} r={r}", grid.size, results, structure=structure)
    if control:
        residuals = control_residuals(grid.n, grid.size, r, grid.bands, trials, seed)
        report.control = residuals
        for ident, value in residuals.items():
            report.checks[f"control_{ident}_nonvanishing"] = value >= CONTROL_FLOOR
    logger.info("foliation grid suite n=%d r=%d size=%d: ok=%s", grid.n, r, grid.size, report.ok)
    return report
