"""Torsion operators, commutation identities and sufficient conditions for degeneration.

Every certificate is evaluated per bidegree and aggregated. When a certificate
fires, the degeneration index computed independently by the spectral engine
must confirm it; a fired certificate that the engine contradicts is a
:class:`~hodgelab.errors.SoundnessError`.

Identities and theorem-level equivalences are only asserted on models where
``d`` kills every form of top-minus-one degree; elsewhere they are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    InternalConsistencyError,
    NumericError,
    PreconditionError,
    SoundnessError,
    TheoremViolationError,
)
from .hodge import (
    HodgePackage,
    MetricFlags,
    build_hodge_package,
    build_metric,
    has_stokes_property,
    metric_classify,
)
from .linalg import (
    I,
    Backend,
    GramForm,
    Subspace,
    gr,
    hermitian_eigs,
    psd_domination_check,
    rank_kernel_image,
    self_adjoint_defect,
    to_float,
    zero_threshold,
)
from .models.complex import DoubleComplex, apply_d
from .models.forms import Form
from .operators import BigradedOperator, Bidegree, commutator, relative_residual
from .spectral import degeneration_index
from .utils import child_seeds, get_logger, make_rng, random_complex, random_hermitian_pd

logger = get_logger(__name__)

IDENTITY_IDS = (
    "COMM1",
    "COMM2",
    "COMM3",
    "COMM4",
    "BKN1",
    "BKN2",
    "BKN2c",
    "AUX1",
    "AUX2",
    "AUX3",
    "AUX4",
    "ANTI",
    "L54",
    "L54q",
    "L55",
)

E2_CERTIFICATES = ("GAP", "COMMUTE", "RBAR", "KERINC")
E1_CERTIFICATES = ("R0", "DOMINATION")


def _key(key: Bidegree) -> str:
    return f"{key[0]},{key[1]}"


def _wedge_operator(k: DoubleComplex, form: Form, bidegree: Bidegree, backend: Backend) -> BigradedOperator:
    """``u -> form ^ u`` on every component for a form of pure type ``bidegree``."""
    if not form:
        return BigradedOperator.zero(bidegree, k.dims, backend)
    blocks = {}
    for key in k.components():
        m = k.algebra.wedge_matrix(form, *key, backend=backend)
        if m.size:
            blocks[key] = m
    return BigradedOperator(bidegree, k.dims, blocks, backend)


@dataclass(frozen=True, eq=False)
class TorsionPackage:
    """Zero-order operators built from ``del omega`` and ``dbar omega``.

    ``s`` and ``s_bar`` are ``[del omega ^, (del omega ^)*]`` and its conjugate
    counterpart; ``curvature`` is ``[Lambda, [Lambda, (i/2) del dbar omega ^]]``.
    """

    del_omega: BigradedOperator
    dbar_omega: BigradedOperator
    del_omega_star: BigradedOperator
    dbar_omega_star: BigradedOperator
    tau: BigradedOperator
    tau_bar: BigradedOperator
    tau_star: BigradedOperator
    tau_bar_star: BigradedOperator
    s: BigradedOperator
    s_bar: BigradedOperator
    z: BigradedOperator
    r_bar: BigradedOperator
    curvature: BigradedOperator
    t: BigradedOperator
    t_bar: BigradedOperator

    @property
    def backend(self) -> Backend:
        return self.tau.backend


def _check_psd(op: BigradedOperator, pkg: HodgePackage, name: str, tol: float) -> None:
    label = pkg.complex.label
    for key in pkg.complex.components():
        values = hermitian_eigs(to_float(op.block(*key)), pkg.gram(*key)).values
        if values.size and values[0] < -tol * max(1.0, float(np.max(np.abs(values)))):
            raise InternalConsistencyError(
                f"{label}: {name} is not positive semi-definite on K^{key} (min eigenvalue {values[0]:.3e})"
            )


def torsion_operators(k: DoubleComplex, pkg: HodgePackage, psd_tol: float = 1e-10) -> TorsionPackage:
    """Build ``tau``, ``tau-bar``, ``S-bar``, ``Z``, ``R-bar``, ``T`` and ``T-bar`` from the metric of ``pkg``."""
    m = pkg.metric
    exact = k.backend == Backend.EXACT and m.backend == Backend.EXACT
    backend = Backend.EXACT if exact else Backend.FLOAT
    grams: Dict[Bidegree, GramForm] = m.grams if exact else m.float_grams()

    del_o, dbar_o = apply_d(k, m.omega)
    ddbar_o = apply_d(k, dbar_o)[0]
    del_w = _wedge_operator(k, del_o, (2, 1), backend)
    dbar_w = _wedge_operator(k, dbar_o, (1, 2), backend)
    ddbar_w = _wedge_operator(k, ddbar_o, (2, 2), backend)
    del_ws, dbar_ws = del_w.adjoint(grams), dbar_w.adjoint(grams)

    lam = m.dual_lefschetz
    tau = commutator(lam, del_w)
    tau_bar = commutator(lam, dbar_w)
    tau_star, tau_bar_star = tau.adjoint(grams), tau_bar.adjoint(grams)
    s = commutator(del_w, del_ws)
    s_bar = commutator(dbar_w, dbar_ws)
    half_i = gr("1/2*i") if exact else 0.5j
    curvature = commutator(lam, commutator(lam, ddbar_w * half_i))

    tp = TorsionPackage(
        del_omega=del_w,
        dbar_omega=dbar_w,
        del_omega_star=del_ws,
        dbar_omega_star=dbar_ws,
        tau=tau,
        tau_bar=tau_bar,
        tau_star=tau_star,
        tau_bar_star=tau_bar_star,
        s=s,
        s_bar=s_bar,
        z=commutator(tau, tau_star) + s,
        r_bar=commutator(tau_bar, tau_bar_star) - s_bar,
        curvature=curvature,
        t=curvature - s,
        t_bar=curvature - s_bar,
    )
    _check_psd(tp.s_bar, pkg, "S-bar", psd_tol)
    _check_psd(tp.z, pkg, "Z", psd_tol)
    for key in k.components():
        defect = self_adjoint_defect(to_float(tp.t.block(*key)), pkg.gram(*key))
        if defect > 1e-10:
            raise InternalConsistencyError(f"{k.label}: T is not self-adjoint on K^{key} (defect {defect:.3e})")
    logger.debug("%s: torsion operators built (%s backend)", k.label, backend.value)
    return tp


# ---------------------------------------------------------------------------
# Identity suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResult:
    identity: str
    residual: float
    exact: bool
    tol: float
    detail: Dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        if self.exact:
            return self.residual == 0.0
        return self.residual <= self.tol


@dataclass
class IdentityReport:
    label: str
    results: Dict[str, IdentityResult]
    asserted: bool

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results.values())

    def residual(self, identity: str) -> float:
        return self.results[identity].residual

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "ok": self.ok,
            "asserted": self.asserted,
            "residuals": {name: r.residual for name, r in self.results.items()},
            "exact": {name: r.exact for name, r in self.results.items()},
            "failing": [name for name, r in self.results.items() if not r.ok],
        }


def _operator_residual(pairs: Sequence[Tuple[BigradedOperator, BigradedOperator]]) -> Tuple[float, bool]:
    worst, exact = 0.0, True
    for lhs, rhs in pairs:
        both_exact = lhs.backend == Backend.EXACT and rhs.backend == Backend.EXACT
        exact = exact and both_exact
        if both_exact and (lhs - rhs).is_zero():
            continue
        worst = max(worst, relative_residual(lhs, rhs))
    return worst, exact


def _lambda_s_l_quadratic(k: DoubleComplex, pkg: HodgePackage, tp: TorsionPackage, trials: int, seed: int) -> float:
    """Quadratic-form expansion of ``[[Lambda, S-bar], L]`` and ``<omega^u, omega^v>`` on random forms."""
    n = k.n
    lam, lef = pkg.dual_lefschetz.to_float(), pkg.lefschetz.to_float()
    s_bar = tp.s_bar.to_float()
    bracket = commutator(commutator(lam, s_bar), lef)
    worst = 0.0
    comps = k.components()
    for key, child in zip(comps, child_seeds(seed, len(comps))):
        p, q = key
        dim = k.dim(p, q)
        if dim == 0:
            continue
        rng = make_rng(child)
        g = pkg.gram(p, q)
        up, down = (p + 1, q + 1), (p - 1, q - 1)
        shift = p + q - n
        for _ in range(trials):
            u = random_complex(rng, dim)
            v = random_complex(rng, dim)
            su = s_bar.block(p, q) @ u
            lhs = g.inner(bracket.block(p, q) @ u, u)
            rhs = shift * g.inner(su, u)
            lhs2, rhs2 = 0.0, -shift * g.inner(u, v)
            if k.dim(*up):
                gu = pkg.gram(*up)
                wu, wv = lef.block(p, q) @ u, lef.block(p, q) @ v
                rhs += gu.inner(s_bar.block(*up) @ wu, wu)
                lhs2 = gu.inner(wu, wv)
            if k.dim(*down):
                gd = pkg.gram(*down)
                lu, lv = lam.block(p, q) @ u, lam.block(p, q) @ v
                rhs += gd.inner(s_bar.block(*down) @ lu, lu) - 2.0 * complex(gd.inner(lam.block(p, q) @ su, lu)).real
                rhs2 += gd.inner(lu, lv)
            norm2 = g.norm(u) ** 2
            worst = max(
                worst,
                abs(lhs - rhs) / max(abs(lhs), abs(rhs), norm2),
                abs(lhs2 - rhs2) / max(abs(lhs2), abs(rhs2), g.norm(u) * g.norm(v)),
            )
    return float(worst)


def _harmonic_stability(k: DoubleComplex, pkg: HodgePackage, tol: float) -> Tuple[bool, float]:
    """Whether ``del`` and ``del*`` map ``ker Lap''`` into ``ker Lap''``, with the worst leak."""
    worst = 0.0
    for (p, q), h in pkg.harmonic.items():
        if h.shape[1] == 0:
            continue
        for op, tgt in ((k.d1, (p + 1, q)), (pkg.del_star, (p - 1, q))):
            if k.dim(*tgt) == 0:
                continue
            block = to_float(op.block(p, q))
            image = block @ h
            leak = image - to_float(pkg.proj_dbar.block(*tgt)) @ image
            worst = max(worst, float(np.linalg.norm(leak)) / max(1.0, float(np.linalg.norm(block))))
    return worst <= tol, worst


def _commutation_with_laplacian(k: DoubleComplex, pkg: HodgePackage, tol: float) -> bool:
    lhs, rhs = k.d1 @ pkg.lap_dbar, pkg.lap_dbar @ k.d1
    if lhs.backend == Backend.EXACT and rhs.backend == Backend.EXACT:
        return (lhs - rhs).is_zero()
    return relative_residual(lhs, rhs) <= tol


def _projector_commutation(k: DoubleComplex, pkg: HodgePackage) -> float:
    d = k.d1.to_float()
    return relative_residual(d @ pkg.proj_dbar, pkg.proj_dbar @ d)


def _l55(k: DoubleComplex, pkg: HodgePackage, tol: float, projector_tol: float) -> IdentityResult:
    commutes = _commutation_with_laplacian(k, pkg, tol)
    proj_res = _projector_commutation(k, pkg)
    proj_commutes = proj_res <= projector_tol
    stable, leak = _harmonic_stability(k, pkg, projector_tol)
    consistent = (proj_commutes or not commutes) and proj_commutes == stable
    return IdentityResult(
        "L55",
        0.0 if consistent else 1.0,
        exact=False,
        tol=0.0,
        detail={
            "del_commutes_with_laplacian": commutes,
            "del_commutes_with_projector": proj_commutes,
            "harmonic_space_stable": stable,
            "projector_residual": proj_res,
            "harmonic_leak": leak,
        },
    )


def identity_suite(
    k: DoubleComplex,
    pkg: HodgePackage,
    tp: TorsionPackage,
    trials: int = 5,
    seed: int = 0,
    tol: float = 1e-10,
    projector_tol: float = 1e-8,
) -> IdentityReport:
    """Residual of every standard and twisted commutation relation, keyed by identity ID.

    Operator identities are compared as whole bigraded operators; on the exact
    backend the difference must vanish identically. ``L54q`` is checked on
    ``trials`` random forms per bidegree and ``L55`` is a boolean implication.
    """
    if trials < 1:
        raise PreconditionError(f"identity_suite needs trials >= 1, got {trials}")
    d, db = k.d1, k.d2
    ds, dbs = pkg.del_star, pkg.dbar_star
    lam, lef = pkg.dual_lefschetz, pkg.lefschetz
    i = I if tp.backend == Backend.EXACT else 1j

    lap_del_tau = commutator(d + tp.tau, ds + tp.tau_star)
    lap_dbar_tau = commutator(db + tp.tau_bar, dbs + tp.tau_bar_star)
    aux3 = commutator(d, tp.tau_bar_star)
    anti1 = commutator(d, dbs + tp.tau_bar_star)
    anti2 = commutator(db, ds + tp.tau_star)

    pairs: Dict[str, List[Tuple[BigradedOperator, BigradedOperator]]] = {
        "COMM1": [(ds + tp.tau_star, commutator(lam, db) * i)],
        "COMM2": [(dbs + tp.tau_bar_star, commutator(lam, d) * (-i))],
        "COMM3": [(d + tp.tau, commutator(dbs, lef) * (-i))],
        "COMM4": [(db + tp.tau_bar, commutator(ds, lef) * i)],
        "BKN1": [(pkg.lap_dbar, pkg.lap_del + commutator(d, tp.tau_star) - commutator(db, tp.tau_bar_star))],
        "BKN2": [(pkg.lap_dbar, lap_del_tau + tp.t)],
        "BKN2c": [(pkg.lap_del, lap_dbar_tau + tp.t_bar)],
        "AUX1": [(commutator(lef, tp.tau), tp.del_omega * 3)],
        "AUX2": [(commutator(lam, tp.tau), tp.tau_bar_star * (-2 * i))],
        "AUX3": [(aux3, -commutator(d, dbs)), (aux3, commutator(tp.tau, dbs))],
        "AUX4": [(-commutator(db, tp.tau_bar_star), commutator(tp.tau, ds + tp.tau_star) + tp.t)],
        "ANTI": [
            (anti1, BigradedOperator.zero(anti1.bidegree, k.dims, anti1.backend)),
            (anti2, BigradedOperator.zero(anti2.bidegree, k.dims, anti2.backend)),
        ],
        "L54": [(tp.r_bar, tp.s_bar * 2 + commutator(commutator(lam, tp.s_bar), lef))],
    }

    results: Dict[str, IdentityResult] = {}
    for name, items in pairs.items():
        residual, exact = _operator_residual(items)
        results[name] = IdentityResult(name, residual, exact, tol)
    results["L54q"] = IdentityResult("L54q", _lambda_s_l_quadratic(k, pkg, tp, trials, seed), False, tol)
    results["L55"] = _l55(k, pkg, tol, projector_tol)

    report = IdentityReport(k.label, results, asserted=has_stokes_property(k))
    failing = [name for name in IDENTITY_IDS if not results[name].ok]
    if failing and report.asserted:
        name = failing[0]
        raise TheoremViolationError(
            f"{k.label}: identity {name} fails (residual {results[name].residual:.3e}, "
            f"{'exact' if results[name].exact else 'float'} backend)"
        )
    if failing:
        logger.warning("%s: identities %s fail on a model where they are not asserted", k.label, failing)
    logger.debug("%s: identity suite done, worst residual %.3e", k.label, max(r.residual for r in results.values()))
    return report


# ---------------------------------------------------------------------------
# Spectral gap and torsion bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapBound:
    bidegree: Bidegree
    rho: float
    c: float
    lambda0: float
    mu0: float

    def as_dict(self) -> Dict[str, float]:
        return {"rho": self.rho, "C": self.c, "lambda0": self.lambda0, "mu0": self.mu0}


def _eigenvalues(op: BigradedOperator, pkg: HodgePackage, key: Bidegree, name: str) -> np.ndarray:
    try:
        return hermitian_eigs(to_float(op.block(*key)), pkg.gram(*key)).values
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"{pkg.complex.label}: eigensolve of {name} failed on K^{key}: {exc}") from exc


def _smallest_positive(values: np.ndarray, rel: float) -> float:
    thr = zero_threshold(values, rel)
    positive = values[values > thr]
    return float(positive.min()) if positive.size else math.inf


def gap_and_bound(k: DoubleComplex, pkg: HodgePackage, tp: TorsionPackage, p: int, q: int) -> GapBound:
    """``rho`` of ``Lap' + Lap''``, the top of ``Z`` and the smallest positive eigenvalues of ``Lap'`` and ``Lap''``.

    An empty positive spectrum gives ``+inf``.
    """
    key = (p, q)
    if key not in k.dims:
        raise PreconditionError(f"{k.label}: K^{key} does not exist")
    rel = pkg.harmonic_rel
    rho = _smallest_positive(_eigenvalues(pkg.lap_sum, pkg, key, "Lap' + Lap''"), rel)
    z_values = _eigenvalues(tp.z, pkg, key, "Z")
    c = max(float(z_values.max()), 0.0) if z_values.size else 0.0
    lambda0 = _smallest_positive(_eigenvalues(pkg.lap_del, pkg, key, "Lap'"), rel)
    mu0 = _smallest_positive(_eigenvalues(pkg.lap_dbar, pkg, key, "Lap''"), rel)
    return GapBound(key, rho, c, lambda0, mu0)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    """One sufficient condition for ``E_r = E_inf`` with ``r = target_page``."""

    name: str
    applicable: bool
    verdict: bool
    hypothesis_values: Dict[str, object]
    target_page: int = 2
    cross_check: Optional[int] = None
    per_bidegree: Dict[str, object] = field(default_factory=dict)

    @property
    def fired(self) -> bool:
        return self.applicable and self.verdict

    @property
    def sound(self) -> bool:
        return not self.fired or self.cross_check is None or self.cross_check <= self.target_page

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "applicable": self.applicable,
            "verdict": self.verdict,
            "fired": self.fired,
            "target_page": self.target_page,
            "cross_check": self.cross_check,
            "hypothesis_values": self.hypothesis_values,
            "per_bidegree": self.per_bidegree,
        }


def _soundness(k: DoubleComplex, reports: List[CertificateReport], index: int) -> List[CertificateReport]:
    for rep in reports:
        rep.cross_check = index
        if not rep.sound:
            raise SoundnessError(
                f"{k.label}: certificate {rep.name} fired for E_{rep.target_page} degeneration "
                f"but the spectral sequence degenerates at E_{index}"
            )
    return reports


def _resolve(k: DoubleComplex, pkg: HodgePackage, flags: Optional[MetricFlags], index: Optional[int]):
    flags = flags or metric_classify(k, pkg.metric, pkg)
    if index is None:
        index = degeneration_index(k, policy=pkg.policy).degeneration_index
    return flags, index


def _scaled_norm(m: np.ndarray, reference: np.ndarray) -> float:
    return float(np.linalg.norm(m)) / max(1.0, float(np.linalg.norm(reference)))


def commute_conditions(k: DoubleComplex, pkg: HodgePackage, tp: TorsionPackage, tol: float = 1e-8):
    """Per bidegree: ``p'' del = del p''``, and the ``[del, dbar*]`` / ``[del, tau-bar*]`` conditions on ``ker Lap''``."""
    d = k.d1.to_float()
    proj = pkg.proj_dbar
    mixed = pkg.mixed.to_float()
    twisted = commutator(k.d1, tp.tau_bar_star).to_float()
    out: Dict[Bidegree, Tuple[bool, bool, bool]] = {}
    for key in k.components():
        p, q = key
        p_src = proj.block(p, q)
        h = pkg.harmonic[key]
        perp = np.eye(k.dim(p, q)) - p_src

        a = True
        if k.dim(p + 1, q):
            diff = d.block(p, q) @ p_src - proj.block(p + 1, q) @ d.block(p, q)
            a = _scaled_norm(diff, d.block(p, q)) <= tol

        def dbar_star_type(op: BigradedOperator) -> bool:
            tgt = (p + 1, q - 1)
            if k.dim(*tgt) == 0:
                return True
            block = op.block(p, q)
            on_harmonic = _scaled_norm(block @ h, block) <= tol
            into_perp = _scaled_norm(proj.block(*tgt) @ block @ perp, block) <= tol
            return on_harmonic and into_perp

        out[key] = (a, dbar_star_type(mixed), dbar_star_type(twisted))
    return out


def _tilde_kernel_restriction(pkg: HodgePackage, op: BigradedOperator, key: Bidegree) -> float:
    """``||P* G op P||`` for a G-orthonormal basis ``P`` of ``ker Lap' _{p''} ^ ker Lap''``."""
    basis = pkg.kernel_basis(pkg.lap_tilde, *key)
    if basis.shape[1] == 0:
        return 0.0
    gm = to_float(pkg.gram(*key).matrix)
    restricted = basis.conj().T @ gm @ to_float(op.block(*key)) @ basis
    return float(np.linalg.norm(restricted))


def certify_e2(
    k: DoubleComplex,
    pkg: HodgePackage,
    tp: TorsionPackage,
    flags: Optional[MetricFlags] = None,
    index: Optional[int] = None,
    tol: float = 1e-8,
) -> List[CertificateReport]:
    """GAP, COMMUTE, RBAR and KERINC, each cross-checked against the engine's degeneration index."""
    flags, index = _resolve(k, pkg, flags, index)
    comps = k.components()

    # 1) spectral gap against the torsion bound
    gap_per: Dict[str, object] = {}
    gap_ok = True
    for key in comps:
        b = gap_and_bound(k, pkg, tp, *key)
        holds = b.c <= b.rho / 3.0 + tol * max(1.0, b.c)
        gap_per[_key(key)] = {**b.as_dict(), "holds": holds}
        gap_ok = gap_ok and holds
    gap = CertificateReport("GAP", flags.skt, gap_ok, {"SKT": flags.skt}, per_bidegree=gap_per)

    # 2) commutation of del with the harmonic projector, three equivalent forms
    conditions = commute_conditions(k, pkg, tp, tol)
    a_all = all(c[0] for c in conditions.values())
    b_all = all(c[1] for c in conditions.values())
    c_all = all(c[2] for c in conditions.values())
    if not (a_all == b_all == c_all):
        msg = f"{k.label}: commutation conditions disagree (a={a_all}, b={b_all}, c={c_all})"
        if has_stokes_property(k):
            raise TheoremViolationError(msg)
        logger.warning(msg)
    commute = CertificateReport(
        "COMMUTE",
        True,
        a_all,
        {"a": a_all, "b": b_all, "c": c_all},
        per_bidegree={_key(key): {"a": c[0], "b": c[1], "c": c[2]} for key, c in conditions.items()},
    )

    # 3) R-bar vanishes as a quadratic form on ker Lap~
    r_scale = max(1.0, tp.r_bar.to_float().norm())
    r_per = {_key(key): _tilde_kernel_restriction(pkg, tp.r_bar, key) for key in comps}
    r_ok = all(v <= tol * r_scale for v in r_per.values())
    rbar = CertificateReport("RBAR", flags.skt, r_ok, {"SKT": flags.skt}, per_bidegree=r_per)

    # 4) ker Lap'_{p''} ^ ker Lap'' inside ker Lap'
    k_per: Dict[str, object] = {}
    for key in comps:
        basis = pkg.kernel_basis(pkg.lap_tilde, *key)
        block = to_float(pkg.lap_del.block(*key))
        k_per[_key(key)] = _scaled_norm(block @ basis, block) <= tol if basis.shape[1] else True
    kerinc = CertificateReport("KERINC", True, all(k_per.values()), {}, per_bidegree=k_per)

    reports = _soundness(k, [gap, commute, rbar, kerinc], index)
    logger.info(
        "%s: E_2 certificates fired: %s (degeneration index %d)",
        k.label,
        [r.name for r in reports if r.fired] or "none",
        index,
    )
    return reports


def certify_e1(
    k: DoubleComplex,
    pkg: HodgePackage,
    tp: TorsionPackage,
    flags: Optional[MetricFlags] = None,
    index: Optional[int] = None,
    tol: float = 1e-8,
) -> List[CertificateReport]:
    """R0 (SKT and ``[tau, tau*] = [del omega ^, (del omega ^)*]``) and DOMINATION (``ker Lap'' in ker Lap'``)."""
    flags, index = _resolve(k, pkg, flags, index)

    residual, exact = _operator_residual([(commutator(tp.tau, tp.tau_star), tp.s)])
    r0_zero = residual == 0.0 if exact else residual <= tol
    r0 = CertificateReport(
        "R0", flags.skt, r0_zero, {"SKT": flags.skt, "residual": residual, "exact": exact}, target_page=1
    )

    dom_per: Dict[str, object] = {}
    for key in k.components():
        h = pkg.harmonic[key]
        block = to_float(pkg.lap_del.block(*key))
        dom_per[_key(key)] = _scaled_norm(block @ h, block) <= tol if h.shape[1] else True
    failing = [key for key, ok in dom_per.items() if not ok]
    domination = CertificateReport(
        "DOMINATION", True, not failing, {"failing": failing}, target_page=1, per_bidegree=dom_per
    )
    return _soundness(k, [r0, domination], index)


# ---------------------------------------------------------------------------
# Sharp gap analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SharpGapEntry:
    bidegree: Bidegree
    lambda0: float
    r_bar_norm: float
    hypothesis: bool
    trivial_intersection: bool
    injective: bool
    epsilon: float
    epsilon_holds: bool
    domination: Optional[bool] = None

    @property
    def statements_agree(self) -> bool:
        return self.trivial_intersection == self.injective == self.epsilon_holds


@dataclass
class SharpGapReport:
    label: str
    applicable: bool
    entries: List[SharpGapEntry]

    @property
    def ok(self) -> bool:
        return all(e.statements_agree and e.domination is not False for e in self.entries)

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "applicable": self.applicable,
            "ok": self.ok,
            "hypothesis": {_key(e.bidegree): e.hypothesis for e in self.entries},
            "lambda0": {_key(e.bidegree): e.lambda0 for e in self.entries},
            "r_bar_norm": {_key(e.bidegree): e.r_bar_norm for e in self.entries},
            "epsilon": {_key(e.bidegree): e.epsilon for e in self.entries},
        }


def _restricted_statements(pkg: HodgePackage, key: Bidegree, complement: np.ndarray, tol: float):
    """(iii) trivial intersection, (ii) injectivity and (i) epsilon for ``p''-perp`` on ``complement``."""
    if complement.shape[1] == 0:
        return True, True, 0.0, True
    h = pkg.harmonic[key]
    policy = pkg.policy
    if h.shape[1]:
        meet = Subspace.span(h, policy).intersect(Subspace.span(complement, policy)).dim
    else:
        meet = 0
    image = complement - to_float(pkg.proj_dbar.block(*key)) @ complement
    injective = rank_kernel_image(image, policy).kernel.dim == 0
    gm = to_float(pkg.gram(*key).matrix)
    pairing = image.conj().T @ gm @ image
    squared = np.linalg.eigvalsh(0.5 * (pairing + pairing.conj().T))
    epsilon = float(min(max(1.0 - squared[0], 0.0), 1.0))
    return meet == 0, injective, epsilon, epsilon < 1.0 - tol


def sharp_gap_analysis(
    k: DoubleComplex,
    pkg: HodgePackage,
    tp: TorsionPackage,
    flags: Optional[MetricFlags] = None,
    tol: float = 1e-8,
) -> SharpGapReport:
    """Lower bound for ``p''-perp`` on ``(ker Lap')^perp`` when ``lambda0 > ||R-bar||``.

    Under the hypothesis the three statements (trivial intersection with
    ``ker Lap''``, injectivity, a uniform ``epsilon < 1``) must hold together,
    and ``Lap'_{p''-perp} >= (1 - epsilon) Lap'`` wherever both neighbours of
    ``(p, q)`` in the ``del`` direction satisfy it.
    """
    flags = flags or metric_classify(k, pkg.metric, pkg)
    applicable = flags.skt
    asserted = applicable and has_stokes_property(k)
    r_bar = tp.r_bar.to_float()
    raw: Dict[Bidegree, dict] = {}
    for key in k.components():
        eig = hermitian_eigs(to_float(pkg.lap_del.block(*key)), pkg.gram(*key))
        thr = zero_threshold(eig.values, pkg.harmonic_rel)
        positive = eig.values > thr
        lambda0 = float(eig.values[positive].min()) if positive.any() else math.inf
        r_values = hermitian_eigs(r_bar.block(*key), pkg.gram(*key)).values
        r_norm = float(np.max(np.abs(r_values))) if r_values.size else 0.0
        trivial, injective, epsilon, eps_ok = _restricted_statements(pkg, key, eig.vectors[:, positive], tol)
        raw[key] = dict(
            lambda0=lambda0,
            r_bar_norm=r_norm,
            hypothesis=lambda0 > r_norm,
            trivial_intersection=trivial,
            injective=injective,
            epsilon=epsilon,
            epsilon_holds=eps_ok,
        )
        if not (trivial == injective == eps_ok):
            raise TheoremViolationError(
                f"{k.label}: statements (i)-(iii) on (ker Lap')^perp disagree at {key} "
                f"(intersection trivial={trivial}, injective={injective}, epsilon={epsilon:.3e})"
            )
        if asserted and raw[key]["hypothesis"] and not trivial:
            raise TheoremViolationError(
                f"{k.label}: lambda0 = {lambda0:.3e} > ||R-bar|| = {r_norm:.3e} at {key} "
                "but ker Lap'' meets (ker Lap')^perp"
            )

    lap_pperp = pkg.lap_del_pperp
    lap_del = pkg.lap_del.to_float()
    entries: List[SharpGapEntry] = []
    for key, values in raw.items():
        p, q = key
        neighbours = [raw[n] for n in ((p - 1, q), (p + 1, q)) if n in raw]
        domination = None
        if all(nb["hypothesis"] for nb in neighbours):
            epsilon = max((nb["epsilon"] for nb in neighbours), default=0.0)
            domination = psd_domination_check(
                lap_pperp.block(*key), (1.0 - epsilon) * lap_del.block(*key), pkg.gram(*key)
            )
            if asserted and not domination:
                raise TheoremViolationError(
                    f"{k.label}: Lap'_{{p''-perp}} >= (1 - {epsilon:.3e}) Lap' fails on K^{key}"
                )
        entries.append(SharpGapEntry(key, domination=domination, **values))
    if not applicable:
        logger.warning("%s: metric is not SKT; sharp gap analysis reported without assertions", k.label)
    return SharpGapReport(k.label, applicable, entries)


# ---------------------------------------------------------------------------
# Exploration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchHit:
    sample: int
    seed: int
    skt: bool
    fired: Tuple[str, ...]


def metric_search(
    k: DoubleComplex,
    samples: int = 10,
    seed: int = 0,
    spread: float = 0.5,
    index: Optional[int] = None,
) -> List[SearchHit]:
    """Sample random constant metrics and record which E_2 certificates fire on each."""
    if index is None:
        index = degeneration_index(k).degeneration_index
    hits: List[SearchHit] = []
    for sample, child in enumerate(child_seeds(seed, samples)):
        h = random_hermitian_pd(make_rng(child), k.n, spread)
        metric = build_metric(k, h)
        pkg = build_hodge_package(k, metric)
        tp = torsion_operators(k, pkg)
        flags = metric_classify(k, metric, pkg)
        reports = certify_e2(k, pkg, tp, flags=flags, index=index)
        hits.append(SearchHit(sample, child, flags.skt, tuple(r.name for r in reports if r.fired)))
        logger.debug("%s: sample %d fired %s", k.label, sample, hits[-1].fired)
    return hits
