"""Hermitian metrics, Laplacians, harmonic projectors and the pseudo-differential Laplacian.

Conventions: ``<u, v> = v* G u`` on every component, Lambda is the Gram
adjoint of L, and the fundamental form is
``omega = i sum_{j,k} conj(H^{-1})_{jk} w_j ^ conj(w_k)``, which makes
``Lambda omega = n`` for ``H_{jk} = <w_j, w_k>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConventionError, InternalConsistencyError, MetricError, NumericError, TheoremViolationError
from .linalg import (
    DEFAULT_POLICY,
    Backend,
    GramForm,
    RankPolicy,
    Subspace,
    backend_of,
    conj,
    det,
    exact_array,
    eye,
    g_orthonormal_basis,
    gr,
    hermitian_eigs,
    inverse,
    is_zero,
    orthogonal_projector,
    rank_kernel_image,
    to_float,
    zero_threshold,
    zeros,
)
from .models.complex import DoubleComplex, apply_d
from .models.forms import Form, Monomial, power
from .operators import BigradedOperator, Bidegree, commutator, relative_residual
from .spectral import PageTable, page_table, total_differential
from .utils import get_logger, make_rng, random_complex

logger = get_logger(__name__)


def form_gram(h: np.ndarray, basis: Sequence[Monomial], n: int) -> GramForm:
    """Gram of monomials ``w^I ^ conj(w)^J``: ``<e_a, e_b> = det H[I_a, I_b] conj(det H[J_a, J_b])``."""
    backend = backend_of(h)
    dets: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], object] = {}

    def minor(rows: Tuple[int, ...], cols: Tuple[int, ...]):
        key = (rows, cols)
        if key not in dets:
            dets[key] = det(h[np.ix_(rows, cols)]) if rows else (gr(1) if backend == Backend.EXACT else 1.0 + 0j)
        return dets[key]

    split = [
        (tuple(x for x in m if x < n), tuple(x - n for x in m if x >= n))
        for m in basis
    ]
    g = zeros(len(basis), len(basis), backend)
    for a, (ia, ja) in enumerate(split):
        for b, (ib, jb) in enumerate(split):
            hol = minor(ia, ib)
            anti = minor(ja, jb)
            g[b, a] = hol * anti.conjugate()
    return GramForm(g)


@dataclass(frozen=True, eq=False)
class HermitianMetric:
    """Constant Hermitian metric on the (1,0) coframe and everything it induces."""

    h: np.ndarray
    grams: Dict[Bidegree, GramForm]
    omega: Form
    lefschetz: BigradedOperator
    dual_lefschetz: BigradedOperator

    @property
    def backend(self) -> Backend:
        return backend_of(self.h)

    @property
    def n(self) -> int:
        return int(self.h.shape[0])

    def gram(self, p: int, q: int) -> GramForm:
        return self.grams[(p, q)]

    def float_grams(self) -> Dict[Bidegree, GramForm]:
        return {k: g.to_float() for k, g in self.grams.items()}


def _coerce_metric(h, backend: Backend) -> np.ndarray:
    if isinstance(h, np.ndarray) and h.dtype == object:
        return h if backend == Backend.EXACT else to_float(h)
    arr = np.asarray(h)
    if arr.dtype == object:
        m = exact_array(arr.tolist())
        return m if backend == Backend.EXACT else to_float(m)
    return arr.astype(np.complex128)


def build_metric(k: DoubleComplex, h=None, check_tol: float = 1e-10) -> HermitianMetric:
    """Grams on every ``K^{p,q}``, the form ``omega``, ``L`` and ``Lambda`` for the coframe Gram ``h``.

    ``h`` defaults to the identity. A float ``h`` forces float Grams even on an
    exact complex.
    """
    n = k.n
    alg = k.algebra
    if h is None:
        h = eye(n, k.backend)
    h = _coerce_metric(h, k.backend)
    if h.shape != (n, n):
        raise MetricError(f"{k.label}: metric must be {n}x{n}, got {h.shape}")
    grams: Dict[Bidegree, GramForm] = {}
    try:
        grams[(1, 0)] = GramForm(h)
    except MetricError as exc:
        raise MetricError(f"{k.label}: coframe metric rejected: {exc}") from exc
    for key in k.components():
        grams[key] = form_gram(h, alg.basis(*key), n)
    backend = backend_of(h)

    hinv_c = conj(inverse(h))
    i_unit = gr("i") if backend == Backend.EXACT else 1j
    omega: Form = {}
    for j in range(n):
        for l in range(n):
            c = hinv_c[j, l]
            if (backend == Backend.EXACT and c) or (backend == Backend.FLOAT and abs(c) > 0):
                omega[(j, l + n)] = i_unit * c

    blocks = {key: alg.wedge_matrix(omega, *key, backend=backend) for key in k.components()}
    lefschetz = BigradedOperator((1, 1), k.dims, {key: m for key, m in blocks.items() if m.size}, backend)
    dual = lefschetz.adjoint(grams)
    metric = HermitianMetric(h, grams, omega, lefschetz, dual)
    _check_conventions(k, metric, check_tol)
    return metric


def _check_conventions(k: DoubleComplex, m: HermitianMetric, tol: float) -> None:
    n = k.n
    exact = m.backend == Backend.EXACT
    omega_vec = k.algebra.to_vector(m.omega, 1, 1, m.backend)
    lam_omega = m.dual_lefschetz.apply(omega_vec, 1, 1)
    value = lam_omega[0]
    if (exact and value != n) or (not exact and abs(complex(value) - n) > tol * max(1, n)):
        raise ConventionError(f"{k.label}: Lambda omega = {value}, expected {n}")
    bracket = commutator(m.lefschetz, m.dual_lefschetz)
    expected = BigradedOperator.diagonal(k.dims, m.backend, lambda p, q: p + q - n)
    if exact:
        if not (bracket - expected).is_zero():
            raise ConventionError(f"{k.label}: [L, Lambda] differs from (p+q-n) Id")
    else:
        res = relative_residual(bracket, expected)
        if res > tol:
            raise ConventionError(f"{k.label}: [L, Lambda] differs from (p+q-n) Id (residual {res:.3e})")


@dataclass(frozen=True)
class Decomposition:
    """Dimensions and the largest mutual-orthogonality defect of a direct-sum check."""

    bidegree: Bidegree
    dims: Tuple[int, ...]
    ambient: int
    orthogonality: float

    def holds(self, tol: float) -> bool:
        return sum(self.dims) == self.ambient and self.orthogonality <= tol


@dataclass(frozen=True, eq=False)
class HodgePackage:
    """All metric operators on one double complex.

    Operators that only involve adjoints stay in the backend of the inputs;
    everything built from harmonic projectors is float.
    """

    complex: DoubleComplex
    metric: HermitianMetric
    del_star: BigradedOperator
    dbar_star: BigradedOperator
    lap_del: BigradedOperator
    lap_dbar: BigradedOperator
    mixed: BigradedOperator
    proj_dbar: BigradedOperator
    proj_del: BigradedOperator
    lap_del_p: BigradedOperator
    lap_del_pperp: BigradedOperator
    lap_tilde: BigradedOperator
    harmonic: Dict[Bidegree, np.ndarray] = field(repr=False)
    harmonic_rel: float = 1e-9
    policy: RankPolicy = DEFAULT_POLICY

    @property
    def del_(self) -> BigradedOperator:
        return self.complex.d1

    @property
    def dbar(self) -> BigradedOperator:
        return self.complex.d2

    @property
    def lefschetz(self) -> BigradedOperator:
        return self.metric.lefschetz

    @property
    def dual_lefschetz(self) -> BigradedOperator:
        return self.metric.dual_lefschetz

    @property
    def lap_sum(self) -> BigradedOperator:
        return self.lap_del + self.lap_dbar

    @property
    def proj_dbar_perp(self) -> BigradedOperator:
        return BigradedOperator.identity(self.complex.dims, Backend.FLOAT) - self.proj_dbar

    @property
    def proj_del_perp(self) -> BigradedOperator:
        return BigradedOperator.identity(self.complex.dims, Backend.FLOAT) - self.proj_del

    def gram(self, p: int, q: int) -> GramForm:
        return self.metric.grams[(p, q)].to_float()

    def kernel_basis(self, op: BigradedOperator, p: int, q: int) -> np.ndarray:
        """G-orthonormal basis of the kernel of a self-adjoint PSD operator on ``K^{p,q}``."""
        eig = hermitian_eigs(op.block(p, q), self.gram(p, q))
        thr = zero_threshold(eig.values, self.harmonic_rel)
        return eig.vectors[:, np.abs(eig.values) <= thr]


def harmonic_basis(op: BigradedOperator, grams: Dict[Bidegree, GramForm], key: Bidegree, rel: float) -> np.ndarray:
    eig = hermitian_eigs(op.block(*key), grams[key])
    thr = zero_threshold(eig.values, rel)
    return eig.vectors[:, np.abs(eig.values) <= thr]


def image_basis(m: np.ndarray, g: GramForm, policy: RankPolicy = DEFAULT_POLICY) -> np.ndarray:
    """G-orthonormal basis of the column space of ``m``."""
    m = to_float(m)
    if m.shape[1] == 0 or m.shape[0] == 0:
        return np.zeros((m.shape[0], 0), dtype=np.complex128)
    return g_orthonormal_basis(m, g, policy.rel_tol)


def cross_gram(a: np.ndarray, b: np.ndarray, g: GramForm) -> float:
    """Largest ``|<a_i, b_j>|`` between two column stacks."""
    if a.shape[1] == 0 or b.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(b.conj().T @ to_float(g.matrix) @ a)))


def source_block(op: BigradedOperator, src: Bidegree, dims) -> np.ndarray:
    if src not in dims:
        tgt = op.target(*src)
        return zeros(dims.get(tgt, 0), 0, Backend.FLOAT)
    return to_float(op.block(*src))


def three_space(
    k: DoubleComplex,
    kernel: Dict[Bidegree, np.ndarray],
    d: BigradedOperator,
    d_star: BigradedOperator,
    grams: Dict[Bidegree, GramForm],
    key: Bidegree,
    policy: RankPolicy,
) -> Tuple[Decomposition, Decomposition]:
    """``K = ker Lap + Im d + Im d*`` and ``ker d = ker Lap + Im d`` at ``key``."""
    p, q = key
    g = grams[key]
    a, b = d.bidegree
    im_d = image_basis(source_block(d, (p - a, q - b), k.dims), g, policy)
    im_ds = image_basis(source_block(d_star, (p + a, q + b), k.dims), g, policy)
    harm = kernel[key]
    ortho = max(cross_gram(harm, im_d, g), cross_gram(harm, im_ds, g), cross_gram(im_d, im_ds, g))
    full = Decomposition(key, (harm.shape[1], im_d.shape[1], im_ds.shape[1]), k.dim(*key), ortho)
    ker_d = rank_kernel_image(to_float(d.block(*key)), policy).kernel.dim
    closed = Decomposition(key, (harm.shape[1], im_d.shape[1]), ker_d, cross_gram(harm, im_d, g))
    return full, closed


def build_hodge_package(
    k: DoubleComplex,
    metric: HermitianMetric,
    harmonic_rel: float = 1e-9,
    decomposition_tol: float = 1e-9,
    policy: RankPolicy = DEFAULT_POLICY,
) -> HodgePackage:
    """Adjoints, Laplacians, projectors onto ``ker Lap''`` and ``ker Lap'``, and ``Lap~ = Lap'_{p''} + Lap''``."""
    grams = metric.grams
    del_star = k.d1.adjoint(grams)
    dbar_star = k.d2.adjoint(grams)
    lap_del = k.d1 @ del_star + del_star @ k.d1
    lap_dbar = k.d2 @ dbar_star + dbar_star @ k.d2
    mixed = k.d1 @ dbar_star + dbar_star @ k.d1

    fgrams = metric.float_grams()
    harm_dbar: Dict[Bidegree, np.ndarray] = {}
    harm_del: Dict[Bidegree, np.ndarray] = {}
    for key in k.components():
        harm_dbar[key] = harmonic_basis(lap_dbar, fgrams, key, harmonic_rel)
        harm_del[key] = harmonic_basis(lap_del, fgrams, key, harmonic_rel)
    proj_dbar = BigradedOperator(
        (0, 0), k.dims, {key: orthogonal_projector(v, fgrams[key]) for key, v in harm_dbar.items()}, Backend.FLOAT
    )
    proj_del = BigradedOperator(
        (0, 0), k.dims, {key: orthogonal_projector(v, fgrams[key]) for key, v in harm_del.items()}, Backend.FLOAT
    )
    ident = BigradedOperator.identity(k.dims, Backend.FLOAT)
    d1f, ds = k.d1.to_float(), del_star.to_float()
    lap_del_p = d1f @ proj_dbar @ ds + ds @ proj_dbar @ d1f
    lap_del_pperp = d1f @ (ident - proj_dbar) @ ds + ds @ (ident - proj_dbar) @ d1f
    lap_tilde = lap_del_p + lap_dbar.to_float()

    for key in k.components():
        full, closed = three_space(k, harm_dbar, k.d2, dbar_star, fgrams, key, policy)
        if not full.holds(decomposition_tol):
            raise NumericError(
                f"{k.label}: K^{key} = ker Lap'' + Im dbar + Im dbar* fails (dims {full.dims} of {full.ambient}, "
                f"orthogonality defect {full.orthogonality:.3e})"
            )
        if not closed.holds(decomposition_tol):
            raise NumericError(f"{k.label}: ker dbar = ker Lap'' + Im dbar fails at {key} (dims {closed.dims})")

    logger.debug("%s: Hodge package built on %d components", k.label, len(k.dims))
    return HodgePackage(
        complex=k,
        metric=metric,
        del_star=del_star,
        dbar_star=dbar_star,
        lap_del=lap_del,
        lap_dbar=lap_dbar,
        mixed=mixed,
        proj_dbar=proj_dbar,
        proj_del=proj_del,
        lap_del_p=lap_del_p,
        lap_del_pperp=lap_del_pperp,
        lap_tilde=lap_tilde,
        harmonic=harm_dbar,
        harmonic_rel=harmonic_rel,
        policy=policy,
    )


def delta_p_doubleprime_via_formula(u: np.ndarray, pkg: HodgePackage, p: int, q: int) -> np.ndarray:
    """``sum <u, del psi> del psi + sum <u, del* psi> del* psi`` over Lap''-harmonic ``psi``."""
    k = pkg.complex
    g = pkg.gram(p, q)
    u = to_float(u.reshape(-1, 1))
    out = np.zeros_like(u)
    for src, op in (((p - 1, q), k.d1), ((p + 1, q), pkg.del_star)):
        if src not in pkg.harmonic or pkg.harmonic[src].shape[1] == 0 or k.dim(p, q) == 0:
            continue
        images = to_float(op.block(*src)) @ pkg.harmonic[src]
        coeffs = images.conj().T @ (to_float(g.matrix) @ u)
        out = out + images @ coeffs
    return out.reshape(-1)


def kernel_formula_residual(pkg: HodgePackage, trials: int = 100, seed: int = 0) -> Dict[Bidegree, float]:
    """Largest ``||formula(u) - Lap'_{p''} u|| / ||u||`` per bidegree over random ``u``."""
    rng = make_rng(seed)
    out: Dict[Bidegree, float] = {}
    for key in pkg.complex.components():
        g = pkg.gram(*key)
        block = pkg.lap_del_p.block(*key)
        worst = 0.0
        for _ in range(trials):
            u = random_complex(rng, pkg.complex.dim(*key))
            diff = delta_p_doubleprime_via_formula(u, pkg, *key) - block @ u
            worst = max(worst, g.norm(diff) / max(g.norm(u), 1e-300))
        out[key] = worst
    return out


@dataclass(frozen=True)
class HodgeIsoEntry:
    bidegree: Bidegree
    kernel_dim: int
    e2_dim: int
    kernel_characterization: bool
    closed_decomposition: bool
    dims_agree: bool
    full_decomposition: bool
    orthogonality: float

    @property
    def ok(self) -> bool:
        return self.kernel_characterization and self.closed_decomposition and self.dims_agree and self.full_decomposition


@dataclass
class HodgeIsoReport:
    entries: List[HodgeIsoEntry]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "ok": self.ok,
            "kernel_dims": {f"{e.bidegree[0]},{e.bidegree[1]}": e.kernel_dim for e in self.entries},
            "failing": [f"{e.bidegree[0]},{e.bidegree[1]}" for e in self.entries if not e.ok],
            "max_orthogonality_defect": max((e.orthogonality for e in self.entries), default=0.0),
        }


def stacked_kernel(blocks: Sequence[np.ndarray], cols: int, policy: RankPolicy) -> Subspace:
    mats = [to_float(b) for b in blocks if b.shape[0]]
    if not mats or cols == 0:
        return Subspace.full(cols, Backend.FLOAT, policy)
    scaled = [m / max(np.linalg.norm(m), 1.0) for m in mats]
    return rank_kernel_image(np.concatenate(scaled, axis=0), policy).kernel


def span_columns(vectors: np.ndarray, ambient: int, policy: RankPolicy) -> Subspace:
    if vectors.shape[1] == 0:
        return Subspace.zero(ambient, Backend.FLOAT, policy)
    return Subspace.span(to_float(vectors), policy)


def _closed_boundaries(pkg: HodgePackage, p: int, q: int) -> np.ndarray:
    """Spanning columns of ``Im dbar + del(ker dbar)`` inside ``K^{p,q}``."""
    k = pkg.complex
    cols = [source_block(k.d2, (p, q - 1), k.dims)]
    if k.dim(p - 1, q):
        ker_prev = rank_kernel_image(to_float(k.d2.block(p - 1, q)), pkg.policy).kernel
        cols.append(to_float(k.d1.block(p - 1, q)) @ ker_prev.basis)
    cols = [c for c in cols if c.shape[0] == k.dim(p, q)]
    return np.concatenate(cols, axis=1) if cols else np.zeros((k.dim(p, q), 0), dtype=np.complex128)


def _pdd_blocks(pkg: HodgePackage, p: int, q: int) -> Dict[str, np.ndarray]:
    k = pkg.complex
    out = {
        "dbar": source_block(k.d2, (p, q), k.dims),
        "dbar*": source_block(pkg.dbar_star, (p, q), k.dims),
    }
    if k.dim(p + 1, q):
        out["p''del"] = to_float(pkg.proj_dbar.block(p + 1, q)) @ source_block(k.d1, (p, q), k.dims)
    if k.dim(p - 1, q):
        out["p''del*"] = to_float(pkg.proj_dbar.block(p - 1, q)) @ source_block(pkg.del_star, (p, q), k.dims)
    return out


def hodge_iso_e2_check(
    k: DoubleComplex,
    pkg: HodgePackage,
    e2: Optional[PageTable] = None,
    tol: float = 1e-9,
    raise_on_failure: bool = True,
) -> HodgeIsoReport:
    """Harmonic-space characterization, both orthogonal decompositions and ``dim ker Lap~ = dim E_2``."""
    e2 = e2 or page_table(k, 2, pkg.policy)
    policy = pkg.policy
    entries: List[HodgeIsoEntry] = []
    for key in k.components():
        p, q = key
        dim = k.dim(*key)
        g = pkg.gram(*key)
        tilde = pkg.kernel_basis(pkg.lap_tilde, *key)
        tilde_space = span_columns(tilde, dim, policy)

        # (a) ker Lap~ = ker p''del ^ ker p''del* ^ ker dbar ^ ker dbar*
        blocks = _pdd_blocks(pkg, p, q)
        characterized = stacked_kernel(list(blocks.values()), dim, policy)
        a_ok = characterized.equals(tilde_space)

        # (b) ker p''del ^ ker dbar = ker Lap~ + (Im dbar + del ker dbar), orthogonally
        lhs = stacked_kernel([blocks[n] for n in ("p''del", "dbar") if n in blocks], dim, policy)
        bnd = image_basis(_closed_boundaries(pkg, p, q), g, policy)
        bnd_space = span_columns(bnd, dim, policy)
        ortho_b = cross_gram(tilde, bnd, g)
        b_ok = (
            lhs.dim == tilde.shape[1] + bnd.shape[1]
            and lhs.includes(bnd_space)
            and lhs.includes(tilde_space)
            and ortho_b <= tol
        )

        # (c)
        c_ok = tilde.shape[1] == e2.dims[key]

        # (d) K = ker Lap~ + (Im dbar + del ker dbar) + (Im del* p'' + Im dbar*)
        co_cols = []
        if k.dim(p + 1, q):
            co_cols.append(to_float(pkg.del_star.block(p + 1, q)) @ to_float(pkg.proj_dbar.block(p + 1, q)))
        if k.dim(p, q + 1):
            co_cols.append(to_float(pkg.dbar_star.block(p, q + 1)))
        co = image_basis(np.concatenate(co_cols, axis=1), g, policy) if co_cols else np.zeros((dim, 0), complex)
        ortho_d = max(ortho_b, cross_gram(tilde, co, g), cross_gram(bnd, co, g))
        d_ok = tilde.shape[1] + bnd.shape[1] + co.shape[1] == dim and ortho_d <= tol

        entry = HodgeIsoEntry(key, tilde.shape[1], e2.dims[key], a_ok, b_ok, c_ok, d_ok, ortho_d)
        entries.append(entry)
        if raise_on_failure and not entry.ok:
            raise TheoremViolationError(
                f"{k.label}: E_2 Hodge isomorphism check failed at {key} "
                f"(a={a_ok}, b={b_ok}, c={c_ok} [{tilde.shape[1]} vs {e2.dims[key]}], d={d_ok})"
            )
    return HodgeIsoReport(entries)


def e2_quotient_dims(k: DoubleComplex, pkg: HodgePackage) -> Dict[Bidegree, int]:
    """``dim (ker p''del ^ ker dbar) / (Im dbar + del ker dbar)`` at every bidegree."""
    out: Dict[Bidegree, int] = {}
    for key in k.components():
        blocks = _pdd_blocks(pkg, *key)
        lhs = stacked_kernel([blocks[n] for n in ("p''del", "dbar") if n in blocks], k.dim(*key), pkg.policy)
        bnd = span_columns(_closed_boundaries(pkg, *key), k.dim(*key), pkg.policy)
        out[key] = lhs.dim - bnd.dim
    return out


def laplacian_quadratic_check(pkg: HodgePackage, trials: int = 100, seed: int = 0) -> Dict[Bidegree, float]:
    """``<Lap g, g> = <Lap' g, g> + <Lap'' g, g>`` for pure-type ``g``, with ``Lap`` from the total complex."""
    k = pkg.complex
    rng = make_rng(seed)
    degs = list(k.total_degrees())
    comps = {deg: [c for c in k.components() if sum(c) == deg] for deg in degs}
    offsets = {}
    total_grams = {}
    for deg in degs:
        off = 0
        size = sum(k.dim(*c) for c in comps[deg])
        gm = np.zeros((size, size), dtype=np.complex128)
        for c in comps[deg]:
            d = k.dim(*c)
            offsets[c] = off
            gm[off:off + d, off:off + d] = pkg.gram(*c).matrix
            off += d
        total_grams[deg] = GramForm(gm)
    dmat = {deg: to_float(total_differential(k, deg)) for deg in degs}

    def adjoint(deg: int) -> np.ndarray:
        m = dmat[deg]
        if m.size == 0:
            return m.conj().T
        return total_grams[deg].inverse @ m.conj().T @ total_grams[deg + 1].matrix

    lap = {}
    for deg in degs:
        size = total_grams[deg].dim
        out = np.zeros((size, size), dtype=np.complex128)
        if deg + 1 in total_grams:
            out += adjoint(deg) @ dmat[deg]
        if deg - 1 in total_grams:
            out += dmat[deg - 1] @ adjoint(deg - 1)
        lap[deg] = out

    residuals: Dict[Bidegree, float] = {}
    for key in k.components():
        deg = sum(key)
        d = k.dim(*key)
        g = pkg.gram(*key)
        worst = 0.0
        for _ in range(trials):
            gamma = random_complex(rng, d)
            big = np.zeros(total_grams[deg].dim, dtype=np.complex128)
            big[offsets[key]:offsets[key] + d] = gamma
            lhs = total_grams[deg].inner(lap[deg] @ big, big)
            rhs = g.inner(to_float(pkg.lap_del.block(*key)) @ gamma, gamma) + g.inner(
                to_float(pkg.lap_dbar.block(*key)) @ gamma, gamma
            )
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
        residuals[key] = worst
    return residuals


@dataclass(frozen=True)
class MetricFlags:
    kahler: bool
    skt: bool
    gauduchon: bool
    super_skt: bool
    sg: bool
    harmonic_omega: bool
    harmonic_omega_power: bool
    harmonic_omega_subspace: bool
    harmonic_omega_power_subspace: bool
    stokes: bool

    def as_dict(self) -> Dict[str, bool]:
        return {
            "kahler": self.kahler,
            "SKT": self.skt,
            "gauduchon": self.gauduchon,
            "super_SKT": self.super_skt,
            "sG": self.sg,
            "harmonic_omega": self.harmonic_omega,
            "harmonic_omega_power": self.harmonic_omega_power,
        }


def _form_zero(form: Form, tol: float, exact: bool = False) -> bool:
    if exact:
        return all(c == 0 for c in form.values())
    return all(abs(complex(c)) <= tol for c in form.values())


def has_stokes_property(k: DoubleComplex) -> bool:
    """Whether ``d`` kills every form of total degree ``2n - 1`` (unimodular model)."""
    n = k.n
    return all(
        is_zero(to_float(op.block(*src)), 1e-12)
        for op, src in ((k.d1, (n - 1, n)), (k.d2, (n, n - 1)))
        if src in k.dims
    )


def _in_image(vec: np.ndarray, columns: np.ndarray, policy: RankPolicy) -> bool:
    if not np.any(vec):
        return True
    if columns.shape[1] == 0:
        return float(np.max(np.abs(vec))) <= 1e-12
    space = Subspace.span(columns, policy)
    return space.residual(vec.reshape(-1, 1)) <= 1e-8


def metric_classify(k: DoubleComplex, m: HermitianMetric, pkg: Optional[HodgePackage] = None, tol: float = 1e-10) -> MetricFlags:
    """Kähler, SKT, Gauduchon, super SKT, strongly Gauduchon and Lap'_{p''}-harmonicity of ``omega``, ``omega^{n-1}``."""
    n = k.n
    alg = k.algebra
    policy = pkg.policy if pkg is not None else DEFAULT_POLICY
    omega = m.omega
    omega_pow = power(omega, n - 1)
    del_o, dbar_o = apply_d(k, omega)
    del_p, dbar_p = apply_d(k, omega_pow)
    ddbar_o = apply_d(k, dbar_o)[0]
    ddbar_p = apply_d(k, dbar_p)[0]

    # rational metrics on an exact model are classified without a tolerance
    exact = k.backend == Backend.EXACT and m.backend == Backend.EXACT
    kahler = _form_zero(del_o, tol, exact) and _form_zero(dbar_o, tol, exact)
    skt = _form_zero(ddbar_o, tol, exact)
    gauduchon = _form_zero(ddbar_p, tol, exact)

    def dbar_image(p: int, q: int) -> np.ndarray:
        if (p, q - 1) not in k.dims or (p, q) not in k.dims:
            return np.zeros((k.dim(p, q), 0), dtype=np.complex128)
        return to_float(k.d2.block(p, q - 1))

    def vec(form: Form, p: int, q: int) -> np.ndarray:
        if (p, q) not in k.dims:
            return np.zeros(0, dtype=np.complex128)
        return to_float(alg.to_vector(form, p, q, Backend.FLOAT).reshape(-1, 1)).reshape(-1)

    super_skt = _in_image(vec(del_o, 2, 1), dbar_image(2, 1), policy) if n >= 2 else True
    sg = _in_image(vec(del_p, n, n - 1), dbar_image(n, n - 1), policy) if n >= 1 else True

    harmonic_omega = harmonic_power = True
    sub_omega = sub_power = True
    if pkg is not None:
        harmonic_omega = _harmonic_under(pkg, vec(omega, 1, 1), 1, 1)
        harmonic_power = _harmonic_under(pkg, vec(omega_pow, n - 1, n - 1), n - 1, n - 1)
        sub_omega = _subspace_condition(pkg, vec(omega, 1, 1), 1, 1)
        sub_power = _subspace_condition(pkg, vec(omega_pow, n - 1, n - 1), n - 1, n - 1)
        if harmonic_omega != sub_omega or harmonic_power != sub_power:
            raise InternalConsistencyError(
                f"{k.label}: Lap'_{{p''}}-harmonicity of omega disagrees with its subspace characterization"
            )
    flags = MetricFlags(
        kahler, skt, gauduchon, super_skt, sg, harmonic_omega, harmonic_power, sub_omega, sub_power,
        has_stokes_property(k),
    )
    if pkg is not None and flags.stokes:
        if super_skt and sg and not (harmonic_omega and harmonic_power):
            raise TheoremViolationError(f"{k.label}: super SKT and sG metric with non-harmonic omega")
        if skt and gauduchon:
            both = super_skt and sg
            if not (harmonic_omega == harmonic_power == both):
                raise TheoremViolationError(
                    f"{k.label}: SKT + Gauduchon metric breaks the harmonic-omega equivalence "
                    f"({harmonic_omega}, {harmonic_power}, {both})"
                )
    if kahler and pkg is not None and pkg.lap_del_p.norm() > 1e-9 * max(1.0, pkg.lap_del.norm()):
        raise TheoremViolationError(f"{k.label}: Kähler metric with nonzero Lap'_{{p''}}")
    return flags


def _harmonic_under(pkg: HodgePackage, v: np.ndarray, p: int, q: int) -> bool:
    if (p, q) not in pkg.complex.dims:
        return True
    out = to_float(pkg.lap_del_p.block(p, q)) @ v
    return float(np.linalg.norm(out)) <= 1e-8 * max(1.0, float(np.linalg.norm(v)))


def _subspace_condition(pkg: HodgePackage, v: np.ndarray, p: int, q: int) -> bool:
    """``del v`` and ``del* v`` both lie in ``Im dbar + Im dbar*``."""
    k = pkg.complex
    if (p, q) not in k.dims:
        return True
    for op, tgt in ((k.d1, (p + 1, q)), (pkg.del_star, (p - 1, q))):
        if tgt not in k.dims:
            continue
        image = to_float(op.block(p, q)) @ v
        cols = []
        if (tgt[0], tgt[1] - 1) in k.dims:
            cols.append(to_float(k.d2.block(tgt[0], tgt[1] - 1)))
        if (tgt[0], tgt[1] + 1) in k.dims:
            cols.append(to_float(pkg.dbar_star.block(tgt[0], tgt[1] + 1)))
        span = np.concatenate(cols, axis=1) if cols else np.zeros((k.dim(*tgt), 0), dtype=np.complex128)
        if not _in_image(image, span, pkg.policy):
            return False
    return True
