"""Laplacians, projectors and degeneration checks on a foliated complex.

On ``E^{p,q} = Lambda^p N* (x) Lambda^q F*`` the holomorphic ``del`` splits as
``del_N + del_F``. A product metric keeps the ``E^{p,q}`` mutually
orthogonal, so every operator below is a :class:`BigradedOperator` on the
``(N, F)`` grading. ``Lap'`` itself lives on ``Lambda^{k,0}`` and is kept as
one matrix per total degree, in the concatenated ``E`` coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import InternalConsistencyError, NumericError, ProductMetricError, SoundnessError, TheoremViolationError
from .hodge import (
    cross_gram,
    form_gram,
    harmonic_basis,
    image_basis,
    source_block,
    span_columns,
    stacked_kernel,
)
from .linalg import (
    DEFAULT_POLICY,
    Backend,
    GramForm,
    RankPolicy,
    backend_of,
    conj,
    eye,
    gr,
    gram_adjoint,
    hermitian_eigs,
    inverse,
    is_zero,
    matmul,
    orthogonal_projector,
    rank_kernel_image,
    self_adjoint_defect,
    to_float,
    zero_threshold,
)
from .models.foliated import FoliatedComplex, embedding
from .models.forms import Form
from .operators import BigradedOperator, Bidegree, commutator, relative_residual
from .spectral import ConvergenceReport, PageTable, degeneration_index, page_table
from .utils import get_logger, make_rng, random_complex

logger = get_logger(__name__)


def _key(key: Bidegree) -> str:
    return f"{key[0]},{key[1]}"


@dataclass(frozen=True, eq=False)
class ProductMetric:
    """Coframe metric that is block-diagonal for the partition ``N | F``."""

    h: np.ndarray
    n_idx: Tuple[int, ...]
    f_idx: Tuple[int, ...]
    omega_n: Form = field(repr=False)
    omega_f: Form = field(repr=False)

    @property
    def g_n(self) -> np.ndarray:
        return self.h[np.ix_(self.n_idx, self.n_idx)]

    @property
    def g_f(self) -> np.ndarray:
        return self.h[np.ix_(self.f_idx, self.f_idx)]

    @property
    def backend(self) -> Backend:
        return backend_of(self.h)


def _partial_omega(h: np.ndarray, idx: Tuple[int, ...], n: int) -> Form:
    """``i sum conj(H_S^{-1})_{jk} w_j ^ conj(w_k)`` over one block ``S`` of the partition."""
    exact = backend_of(h) == Backend.EXACT
    block_inv = conj(inverse(h[np.ix_(idx, idx)]))
    unit = gr("i") if exact else 1j
    out: Form = {}
    for a, j in enumerate(idx):
        for b, l in enumerate(idx):
            c = block_inv[a, b]
            if (exact and c) or (not exact and abs(c) > 0):
                out[(j, l + n)] = unit * c
    return out


def product_metric(fk: FoliatedComplex, h=None) -> ProductMetric:
    """Validate ``h`` (identity by default) as a product metric for the split of ``fk``."""
    n = fk.n
    if h is None:
        h = eye(n, fk.backend)
    elif not (isinstance(h, np.ndarray) and h.dtype == object):
        h = np.asarray(h, dtype=np.complex128)
    if h.shape != (n, n):
        raise ProductMetricError(f"{fk.label}: metric must be {n}x{n}, got {h.shape}")
    mixed = h[np.ix_(fk.n_idx, fk.f_idx)]
    if not is_zero(mixed, 1e-14):
        raise ProductMetricError(
            f"{fk.label}: metric couples N={[i + 1 for i in fk.n_idx]} with F={[i + 1 for i in fk.f_idx]}; "
            "a product metric must be block-diagonal"
        )
    return ProductMetric(h, fk.n_idx, fk.f_idx, _partial_omega(h, fk.n_idx, n), _partial_omega(h, fk.f_idx, n))


@dataclass(frozen=True, eq=False)
class FoliatedHodgePackage:
    complex: FoliatedComplex
    metric: ProductMetric
    grams: Dict[Bidegree, GramForm] = field(repr=False)
    del_n_star: BigradedOperator
    del_f_star: BigradedOperator
    lap_n: BigradedOperator
    lap_f: BigradedOperator
    proj_f: BigradedOperator
    lap_n_p: BigradedOperator
    lap_tilde: BigradedOperator
    lap_del: Dict[int, np.ndarray] = field(repr=False)
    harmonic_f: Dict[Bidegree, np.ndarray] = field(repr=False)
    harmonic_rel: float = 1e-9
    policy: RankPolicy = DEFAULT_POLICY

    @property
    def del_n(self) -> BigradedOperator:
        return self.complex.d1

    @property
    def del_f(self) -> BigradedOperator:
        return self.complex.d2

    @property
    def lap_sum(self) -> BigradedOperator:
        return self.lap_n + self.lap_f

    @property
    def proj_f_perp(self) -> BigradedOperator:
        return BigradedOperator.identity(self.complex.dims, Backend.FLOAT) - self.proj_f

    def gram(self, p: int, q: int) -> GramForm:
        return self.grams[(p, q)].to_float()

    def kernel_basis(self, op: BigradedOperator, p: int, q: int) -> np.ndarray:
        eig = hermitian_eigs(to_float(op.block(p, q)), self.gram(p, q))
        return eig.vectors[:, np.abs(eig.values) <= zero_threshold(eig.values, self.harmonic_rel)]

    def complement_basis(self, op: BigradedOperator, p: int, q: int) -> np.ndarray:
        """G-orthonormal basis of the orthogonal complement of ``ker op`` on ``E^{p,q}``."""
        eig = hermitian_eigs(to_float(op.block(p, q)), self.gram(p, q))
        return eig.vectors[:, np.abs(eig.values) > zero_threshold(eig.values, self.harmonic_rel)]


def total_block(fk: FoliatedComplex, op: BigradedOperator, k: int) -> np.ndarray:
    """Matrix of a total-degree-preserving operator on ``Lambda^{k,0}`` in concatenated ``E`` coordinates."""
    comps = fk.total_degree_basis(k)
    offsets, off = {}, 0
    for c in comps:
        offsets[c] = off
        off += fk.dim(*c)
    out = np.zeros((off, off), dtype=np.complex128)
    for c in comps:
        tgt = op.target(*c)
        if tgt not in offsets or fk.dim(*c) == 0 or fk.dim(*tgt) == 0:
            continue
        r, s = offsets[tgt], offsets[c]
        out[r:r + fk.dim(*tgt), s:s + fk.dim(*c)] = to_float(op.block(*c))
    return out


def _holomorphic_laplacians(fk: FoliatedComplex, h: np.ndarray) -> Dict[int, np.ndarray]:
    """``Lap' = del del* + del* del`` on each ``Lambda^{k,0}`` of the base, moved to ``E`` coordinates."""
    base = fk.base
    n = fk.n
    alg = base.algebra
    grams = {k: form_gram(h, alg.basis(k, 0), n) for k in range(n + 1)}
    out: Dict[int, np.ndarray] = {}
    for k in range(n + 1):
        size = base.dim(k, 0)
        lap = np.zeros((size, size), dtype=np.complex128)
        if k < n:
            d = base.d1.block(k, 0)
            lap += to_float(matmul(gram_adjoint(d, grams[k], grams[k + 1]), d))
        if k > 0:
            d = base.d1.block(k - 1, 0)
            lap += to_float(matmul(d, gram_adjoint(d, grams[k - 1], grams[k])))
        emb = embedding(fk, k)
        out[k] = emb.T @ lap @ emb
    return out


def _check_laplacian(name: str, op: BigradedOperator, fk: FoliatedComplex, fgrams) -> None:
    for key in fk.components():
        values = hermitian_eigs(to_float(op.block(*key)), fgrams[key]).values
        if values.size and values[0] < -1e-10 * max(1.0, float(np.max(np.abs(values)))):
            raise InternalConsistencyError(f"{fk.label}: {name} is not positive semi-definite on E^{key}")


def _kernel_matches(fk: FoliatedComplex, lap: BigradedOperator, ops, fgrams, rel: float, policy, name: str) -> None:
    """``ker lap = intersection of ker op`` on every component."""
    for key in fk.components():
        dim = fk.dim(*key)
        harm = harmonic_basis(lap, fgrams, key, rel).shape[1]
        blocks = [to_float(op.block(*key)) for op in ops if fk.dim(*op.target(*key))]
        joint = stacked_kernel(blocks, dim, policy).dim
        if harm != joint:
            raise InternalConsistencyError(
                f"{fk.label}: dim ker {name} = {harm} differs from the joint kernel ({joint}) on E^{key}"
            )


def build_foliated_package(
    fk: FoliatedComplex,
    metric: Optional[ProductMetric] = None,
    harmonic_rel: float = 1e-9,
    expansion_tol: float = 1e-11,
    policy: RankPolicy = DEFAULT_POLICY,
) -> FoliatedHodgePackage:
    """Adjoints, ``Lap'_N``, ``Lap'_F``, the projector ``p'_F`` onto ``ker Lap'_F`` and ``Lap~' = Lap'_{N,p'_F} + Lap'_F``."""
    metric = metric or product_metric(fk)
    n = fk.n
    grams = {key: form_gram(metric.h, fk.bases[key], n) for key in fk.components()}
    fgrams = {key: g.to_float() for key, g in grams.items()}

    dn, df = fk.d1, fk.d2
    dn_star, df_star = dn.adjoint(grams), df.adjoint(grams)
    lap_n = dn @ dn_star + dn_star @ dn
    lap_f = df @ df_star + df_star @ df
    for name, op in (("Lap'_N", lap_n), ("Lap'_F", lap_f)):
        _check_laplacian(name, op, fk, fgrams)
    _kernel_matches(fk, lap_n, (dn, dn_star), fgrams, harmonic_rel, policy, "Lap'_N")
    _kernel_matches(fk, lap_f, (df, df_star), fgrams, harmonic_rel, policy, "Lap'_F")

    harmonic_f = {key: harmonic_basis(lap_f, fgrams, key, harmonic_rel) for key in fk.components()}
    proj_f = BigradedOperator(
        (0, 0), fk.dims, {key: orthogonal_projector(v, fgrams[key]) for key, v in harmonic_f.items()}, Backend.FLOAT
    )
    for key in fk.components():
        pm = proj_f.block(*key)
        if pm.size and (
            self_adjoint_defect(pm, fgrams[key]) > 1e-12 or float(np.max(np.abs(pm @ pm - pm))) > 1e-12
        ):
            raise NumericError(f"{fk.label}: p'_F is not an orthogonal projector on E^{key}")

    dnf, dnsf = dn.to_float(), dn_star.to_float()
    lap_n_p = dnf @ proj_f @ dnsf + dnsf @ proj_f @ dnf
    lap_tilde = lap_n_p + lap_f.to_float()

    lap_del = _holomorphic_laplacians(fk, metric.h)
    # the cross terms shift bidegree, so the expansion is summed in total degree
    expansion = (lap_n, lap_f, commutator(dn, df_star), commutator(df, dn_star))
    for k in range(n + 1):
        lhs = lap_del[k]
        rhs = sum(total_block(fk, term, k) for term in expansion)
        if lhs.size and float(np.linalg.norm(lhs - rhs)) > expansion_tol * max(1.0, float(np.linalg.norm(lhs))):
            raise InternalConsistencyError(
                f"{fk.label}: Lap' on Lambda^{k},0 differs from its (N,F) expansion "
                f"(residual {float(np.linalg.norm(lhs - rhs)):.3e})"
            )

    fpkg = FoliatedHodgePackage(
        complex=fk,
        metric=metric,
        grams=grams,
        del_n_star=dn_star,
        del_f_star=df_star,
        lap_n=lap_n,
        lap_f=lap_f,
        proj_f=proj_f,
        lap_n_p=lap_n_p,
        lap_tilde=lap_tilde,
        lap_del=lap_del,
        harmonic_f=harmonic_f,
        harmonic_rel=harmonic_rel,
        policy=policy,
    )
    _kernel_matches(fk, lap_tilde, (lap_n_p, lap_f), fgrams, harmonic_rel, policy, "Lap~'")
    logger.debug("%s: foliated package built on %d components", fk.label, len(fk.dims))
    return fpkg


def anticommutator_norm(fpkg: FoliatedHodgePackage) -> float:
    """``||[del_N, del_F*]||``, zero exactly on the exact backend when the factors commute."""
    op = commutator(fpkg.del_n, fpkg.del_f_star)
    if op.backend == Backend.EXACT and op.is_zero():
        return 0.0
    return op.norm()


# ---------------------------------------------------------------------------
# Kernel-sum hypothesis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSumReport:
    holds: Dict[Bidegree, bool]
    epsilon: float
    epsilons: Dict[Bidegree, float]
    complements_meet_trivially: Dict[Bidegree, bool]
    quadratic_bound: Optional[bool] = None

    @property
    def holds_everywhere(self) -> bool:
        return all(self.holds.values())

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "holds": {_key(k): v for k, v in sorted(self.holds.items())},
            "holds_everywhere": self.holds_everywhere,
            "epsilon": self.epsilon,
            "quadratic_bound": self.quadratic_bound,
        }


def kernel_sum_hypothesis(
    fk: FoliatedComplex, fpkg: FoliatedHodgePackage, trials: int = 20, seed: int = 0, tol: float = 1e-9
) -> KernelSumReport:
    """``ker Lap'_N + ker Lap'_F = E^{p,q}`` and the constant ``epsilon`` of the lower bound for ``p'_F``.

    ``epsilon = 1 - min s^2`` where ``s`` runs over the singular values of
    ``p'_F`` restricted to ``(ker Lap'_N)^perp``; ``epsilon = 0`` is admitted.
    """
    policy = fpkg.policy
    holds: Dict[Bidegree, bool] = {}
    epsilons: Dict[Bidegree, float] = {}
    meets: Dict[Bidegree, bool] = {}
    for key in fk.components():
        dim = fk.dim(*key)
        ker_n = span_columns(fpkg.kernel_basis(fpkg.lap_n, *key), dim, policy)
        ker_f = span_columns(fpkg.harmonic_f[key], dim, policy)
        holds[key] = ker_n.sum(ker_f).dim == dim

        perp_n = fpkg.complement_basis(fpkg.lap_n, *key)
        perp_f = fpkg.complement_basis(fpkg.lap_f, *key)
        meet = span_columns(perp_n, dim, policy).intersect(span_columns(perp_f, dim, policy)).dim
        meets[key] = meet == 0
        if meets[key] != holds[key]:
            raise InternalConsistencyError(
                f"{fk.label}: kernel sum and complement intersection disagree on E^{key}"
            )

        if perp_n.shape[1] == 0:
            epsilons[key] = 0.0
            continue
        image = to_float(fpkg.proj_f.block(*key)) @ perp_n
        pairing = image.conj().T @ to_float(fpkg.gram(*key).matrix) @ image
        smallest = float(np.linalg.eigvalsh(0.5 * (pairing + pairing.conj().T))[0])
        epsilons[key] = float(min(max(1.0 - smallest, 0.0), 1.0))

    epsilon = max(epsilons.values(), default=0.0)
    bound = None
    if all(holds.values()):
        bound = _quadratic_bound(fk, fpkg, epsilon, trials, seed, tol)
    logger.debug("%s: kernel-sum hypothesis %s, epsilon %.3e", fk.label, all(holds.values()), epsilon)
    return KernelSumReport(holds, epsilon, epsilons, meets, bound)


def _quadratic_bound(fk: FoliatedComplex, fpkg: FoliatedHodgePackage, epsilon: float, trials: int, seed: int, tol: float) -> bool:
    """``<Lap'_{N,p'_F} u, u> >= (1 - epsilon) <Lap'_N u, u>`` on random samples."""
    rng = make_rng(seed)
    for key in fk.components():
        dim = fk.dim(*key)
        if dim == 0:
            continue
        g = fpkg.gram(*key)
        a, b = to_float(fpkg.lap_n_p.block(*key)), to_float(fpkg.lap_n.block(*key))
        for _ in range(trials):
            u = random_complex(rng, dim)
            lhs = complex(g.inner(a @ u, u)).real
            rhs = (1.0 - epsilon) * complex(g.inner(b @ u, u)).real
            if lhs < rhs - tol * max(1.0, abs(rhs)):
                return False
    return True


# ---------------------------------------------------------------------------
# Pages, Hodge isomorphism and the implication chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NFPages:
    pages: Dict[int, PageTable]
    convergence: ConvergenceReport
    holomorphic_cohomology: List[int]

    @property
    def degeneration_index(self) -> int:
        return self.convergence.degeneration_index


def holomorphic_cohomology(fk: FoliatedComplex, policy: RankPolicy = DEFAULT_POLICY) -> List[int]:
    """``dim H^{k,0}_del`` of the base, computed from ``del`` on ``Lambda^{*,0}``."""
    base = fk.base
    ranks = {}
    for k in range(fk.n + 1):
        block = base.d1.block(k, 0)
        ranks[k] = rank_kernel_image(block, policy).rank if block.size else 0
    return [base.dim(k, 0) - ranks[k] - ranks.get(k - 1, 0) for k in range(fk.n + 1)]


def nf_pages_and_degeneration(
    fk: FoliatedComplex, fpkg: Optional[FoliatedHodgePackage] = None, max_page: int = 2
) -> NFPages:
    """Spectral sequence of ``(E, del_N, del_F)`` converging to ``H^{*,0}_del``."""
    policy = fpkg.policy if fpkg is not None else DEFAULT_POLICY
    conv = degeneration_index(fk, max_page=max_page, policy=policy)
    h = holomorphic_cohomology(fk, policy)
    if conv.betti != h:
        raise InternalConsistencyError(
            f"{fk.label}: total cohomology of the (N,F) complex {conv.betti} differs from H^(*,0) = {h}"
        )
    return NFPages(conv.pages, conv, h)


@dataclass(frozen=True)
class NFHodgeIsoEntry:
    bidegree: Bidegree
    kernel_dim: int
    e2_dim: int
    closed_decomposition: bool
    full_decomposition: bool
    orthogonality: float
    relations: float

    def ok(self, tol: float) -> bool:
        return (
            self.closed_decomposition
            and self.full_decomposition
            and self.kernel_dim == self.e2_dim
            and self.relations <= tol
        )


@dataclass
class NFHodgeIsoReport:
    applicable: bool
    anticommutator: float
    entries: List[NFHodgeIsoEntry]
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return all(e.ok(self.tol) for e in self.entries)

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "applicable": self.applicable,
            "ok": self.ok,
            "anticommutator": self.anticommutator,
            "kernel_dims": {_key(e.bidegree): e.kernel_dim for e in self.entries},
            "e2_dims": {_key(e.bidegree): e.e2_dim for e in self.entries},
            "failing": [_key(e.bidegree) for e in self.entries if not e.ok(self.tol)],
        }


def _closed_f_boundaries(fk: FoliatedComplex, policy: RankPolicy, p: int, q: int) -> np.ndarray:
    """``Im del_F + del_N(ker del_F)`` inside ``E^{p,q}``."""
    cols = [source_block(fk.d2, (p, q - 1), fk.dims)]
    if fk.dim(p - 1, q):
        ker_prev = rank_kernel_image(to_float(fk.d2.block(p - 1, q)), policy).kernel
        cols.append(to_float(fk.d1.block(p - 1, q)) @ ker_prev.basis)
    cols = [c for c in cols if c.shape[0] == fk.dim(p, q)]
    return np.concatenate(cols, axis=1) if cols else np.zeros((fk.dim(p, q), 0), dtype=np.complex128)


def _orthogonality_relations(fk: FoliatedComplex, fpkg: FoliatedHodgePackage, p: int, q: int) -> float:
    """``Im del_F`` against ``del_N(ker Lap'_F)`` and ``Im del_F*`` against ``del_N*(ker Lap'_F)``."""
    g = fpkg.gram(p, q)
    worst = 0.0
    if fk.dim(p - 1, q):
        harm = fpkg.harmonic_f[(p - 1, q)]
        worst = max(worst, cross_gram(source_block(fk.d2, (p, q - 1), fk.dims), to_float(fk.d1.block(p - 1, q)) @ harm, g))
    if fk.dim(p + 1, q):
        harm = fpkg.harmonic_f[(p + 1, q)]
        worst = max(
            worst,
            cross_gram(
                source_block(fpkg.del_f_star, (p, q + 1), fk.dims),
                to_float(fpkg.del_n_star.block(p + 1, q)) @ harm,
                g,
            ),
        )
    return worst


def nf_hodge_iso_check(
    fk: FoliatedComplex,
    fpkg: FoliatedHodgePackage,
    hypothesis: Optional[KernelSumReport] = None,
    e2: Optional[PageTable] = None,
    tol: float = 1e-9,
) -> NFHodgeIsoReport:
    """Harmonic representatives of ``E_2(N,F)`` in ``ker Lap~'`` and the orthogonal decompositions behind them.

    Asserted only when the kernel-sum hypothesis holds everywhere and
    ``[del_N, del_F*]`` vanishes; otherwise the same data is reported.
    """
    hypothesis = hypothesis or kernel_sum_hypothesis(fk, fpkg)
    anti = anticommutator_norm(fpkg)
    applicable = hypothesis.holds_everywhere and anti <= tol
    e2 = e2 or page_table(fk, 2, fpkg.policy)
    policy = fpkg.policy
    entries: List[NFHodgeIsoEntry] = []
    for key in fk.components():
        p, q = key
        dim = fk.dim(*key)
        g = fpkg.gram(*key)
        tilde = fpkg.kernel_basis(fpkg.lap_tilde, *key)
        tilde_space = span_columns(tilde, dim, policy)

        blocks = [source_block(fk.d2, key, fk.dims)]
        if fk.dim(p + 1, q):
            blocks.append(to_float(fpkg.proj_f.block(p + 1, q)) @ source_block(fk.d1, key, fk.dims))
        lhs = stacked_kernel(blocks, dim, policy)
        bnd = image_basis(_closed_f_boundaries(fk, policy, p, q), g, policy)
        ortho = cross_gram(tilde, bnd, g)
        closed = (
            lhs.dim == tilde.shape[1] + bnd.shape[1]
            and lhs.includes(tilde_space)
            and lhs.includes(span_columns(bnd, dim, policy))
            and ortho <= tol
        )

        co_cols = []
        if fk.dim(p + 1, q):
            co_cols.append(to_float(fpkg.del_n_star.block(p + 1, q)) @ to_float(fpkg.proj_f.block(p + 1, q)))
        if fk.dim(p, q + 1):
            co_cols.append(to_float(fpkg.del_f_star.block(p, q + 1)))
        co = image_basis(np.concatenate(co_cols, axis=1), g, policy) if co_cols else np.zeros((dim, 0), complex)
        ortho = max(ortho, cross_gram(tilde, co, g), cross_gram(bnd, co, g))
        full = tilde.shape[1] + bnd.shape[1] + co.shape[1] == dim and ortho <= tol

        entry = NFHodgeIsoEntry(
            key, tilde.shape[1], e2.dims[key], closed, full, ortho, _orthogonality_relations(fk, fpkg, p, q)
        )
        entries.append(entry)
        if applicable and not entry.ok(tol):
            raise TheoremViolationError(
                f"{fk.label}: (N,F) Hodge isomorphism fails at {key} "
                f"(kernel {entry.kernel_dim} vs E_2 {entry.e2_dim}, closed={closed}, full={full}, "
                f"relations {entry.relations:.3e})"
            )
    if not applicable:
        logger.warning(
            "%s: (N,F) Hodge isomorphism not applicable (kernel sum everywhere: %s, ||[del_N, del_F*]|| = %.3e)",
            fk.label,
            hypothesis.holds_everywhere,
            anti,
        )
    return NFHodgeIsoReport(applicable, anti, entries, tol)


@dataclass(frozen=True)
class ImplicationChainReport:
    anticommute: bool
    commutes_with_laplacian: bool
    commutes_with_projector: bool
    kernel_inclusion: bool
    kernel_sum_everywhere: bool
    kernel_equality: bool
    quadratic_split: Optional[bool]
    residuals: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return {
            "anticommute": self.anticommute,
            "commutes_with_laplacian": self.commutes_with_laplacian,
            "commutes_with_projector": self.commutes_with_projector,
            "kernel_inclusion": self.kernel_inclusion,
            "kernel_sum_everywhere": self.kernel_sum_everywhere,
            "kernel_equality": self.kernel_equality,
            "quadratic_split": self.quadratic_split,
            "residuals": self.residuals,
        }


def _split_quadratic(fk: FoliatedComplex, fpkg: FoliatedHodgePackage, trials: int, seed: int) -> float:
    """Worst relative gap in ``<Lap' u, u> = <Lap'_N u, u> + <Lap'_F u, u>`` for pure-type ``u``."""
    rng = make_rng(seed)
    worst = 0.0
    for k in range(fk.n + 1):
        comps = fk.total_degree_basis(k)
        lap = fpkg.lap_del[k]
        off = 0
        for c in comps:
            d = fk.dim(*c)
            g = fpkg.gram(*c)
            for _ in range(trials if d else 0):
                u = random_complex(rng, d)
                big = np.zeros(lap.shape[0], dtype=np.complex128)
                big[off:off + d] = u
                whole = (lap @ big)[off:off + d]
                lhs = g.inner(whole, u)
                rhs = g.inner(to_float(fpkg.lap_n.block(*c)) @ u, u) + g.inner(to_float(fpkg.lap_f.block(*c)) @ u, u)
                worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), g.norm(u) ** 2))
            off += d
    return worst


def nf_implication_chain_check(
    fk: FoliatedComplex,
    fpkg: FoliatedHodgePackage,
    hypothesis: Optional[KernelSumReport] = None,
    tol: float = 1e-9,
    trials: int = 10,
    seed: int = 0,
) -> ImplicationChainReport:
    """``[del_N, del_F*] = 0`` => ``del_N`` commutes with ``Lap'_F`` and ``p'_F`` => ``ker Lap~' in ker Lap'_N``.

    Also the unconditional route: the kernel-sum hypothesis everywhere gives
    ``ker Lap~' = ker Lap'_N ^ ker Lap'_F``.
    """
    hypothesis = hypothesis or kernel_sum_hypothesis(fk, fpkg)
    anti_norm = anticommutator_norm(fpkg)
    anti = anti_norm <= tol

    lap_comm = commutator(fpkg.del_n, fpkg.lap_f)
    if lap_comm.backend == Backend.EXACT:
        lap_res = 0.0 if lap_comm.is_zero() else lap_comm.norm()
    else:
        lap_res = relative_residual(fpkg.del_n @ fpkg.lap_f, fpkg.lap_f @ fpkg.del_n)
    dnf = fpkg.del_n.to_float()
    proj_res = relative_residual(dnf @ fpkg.proj_f, fpkg.proj_f @ dnf)
    commutes_lap = lap_res <= tol
    commutes_proj = proj_res <= 1e-8

    inclusion = True
    equality = True
    policy = fpkg.policy
    for key in fk.components():
        dim = fk.dim(*key)
        tilde = fpkg.kernel_basis(fpkg.lap_tilde, *key)
        lap_n = to_float(fpkg.lap_n.block(*key))
        if tilde.shape[1] and float(np.linalg.norm(lap_n @ tilde)) > 1e-8 * max(1.0, float(np.linalg.norm(lap_n))):
            inclusion = False
        joint = fpkg.kernel_basis(fpkg.lap_sum, *key)
        if not span_columns(tilde, dim, policy).equals(span_columns(joint, dim, policy)):
            equality = False

    split = None
    split_res = _split_quadratic(fk, fpkg, trials, seed)
    if anti:
        split = split_res <= 1e-9

    report = ImplicationChainReport(
        anticommute=anti,
        commutes_with_laplacian=commutes_lap,
        commutes_with_projector=commutes_proj,
        kernel_inclusion=inclusion,
        kernel_sum_everywhere=hypothesis.holds_everywhere,
        kernel_equality=equality,
        quadratic_split=split,
        residuals={
            "anticommutator": anti_norm,
            "laplacian_commutator": lap_res,
            "projector_commutator": proj_res,
            "quadratic_split": split_res,
        },
    )
    broken = []
    if anti and not (commutes_lap and commutes_proj):
        broken.append("[del_N, del_F*] = 0 => del_N commutes with Lap'_F and p'_F")
    if commutes_lap and commutes_proj and not inclusion:
        broken.append("commutation => ker Lap~' in ker Lap'_N")
    if hypothesis.holds_everywhere and not equality:
        broken.append("kernel sum => ker Lap~' = ker Lap'_N ^ ker Lap'_F")
    if split is False:
        broken.append("<Lap' u, u> = <Lap'_N u, u> + <Lap'_F u, u>")
    if broken:
        raise TheoremViolationError(f"{fk.label}: implication violated: {broken[0]}")
    return report


def nf_soundness(fk: FoliatedComplex, iso: NFHodgeIsoReport, pages: NFPages) -> None:
    """Both hypotheses everywhere force degeneration at ``E_2``."""
    if iso.applicable and pages.degeneration_index > 2:
        raise SoundnessError(
            f"{fk.label}: (N,F) hypotheses hold but the sequence degenerates at E_{pages.degeneration_index}"
        )
