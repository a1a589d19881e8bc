"""Periodic Fourier grid on the flat torus of complex dimension ``n``.

The ``2n`` real axes are ordered ``x1, y1, ..., xn, yn`` with period ``2 pi``
and ``z_j = x_j + i y_j``. A grid form is a dict from monomials (the
multi-indices of :mod:`hodgelab.models.forms`) to complex arrays over the
grid. ``d/dz_j`` and ``d/dzbar_j`` are exact Fourier multipliers.

The metric is a pointwise Hermitian field. ``h`` is the Gram of the coframe
``dz_1..dz_n`` (the cometric) and the fundamental form is
``omega = i sum conj(h^{-1})_{jk} dz_j ^ dzbar_k``, the conventions of
:mod:`hodgelab.hodge`. The discrete inner product weights every point with the
volume density ``1 / det h`` and the cell volume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import AliasingRiskError, DimensionError, MetricError, PreconditionError
from ..models.forms import ExteriorAlgebra, Monomial
from ..utils import get_logger

logger = get_logger(__name__)

GridForm = Dict[Monomial, np.ndarray]
Bidegree = Tuple[int, int]

METRIC_KINDS = ("constant", "band-limited", "inverse-band-limited")


def _split(m: Monomial, n: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    return tuple(x for x in m if x < n), tuple(x - n for x in m if x >= n)


@dataclass(frozen=True)
class MetricTerm:
    """``matrix * cos(k.x)`` or ``matrix * sin(k.x)`` added to the base of a metric field."""

    matrix: np.ndarray
    k: Tuple[int, ...]
    func: str = "cos"

    def __post_init__(self) -> None:
        if self.func not in ("cos", "sin"):
            raise MetricError(f"Metric term function must be cos or sin, got {self.func!r}")


@dataclass(frozen=True)
class MetricSpec:
    """A pointwise Hermitian metric given by finitely many Fourier terms.

    For ``constant`` and ``band-limited`` the field is the coefficient matrix
    of ``omega``; for ``inverse-band-limited`` it is the cometric ``h`` itself,
    so the inverse of the metric is the band-limited datum.
    """

    base: np.ndarray
    terms: Tuple[MetricTerm, ...] = ()
    kind: str = "constant"

    def __post_init__(self) -> None:
        if self.kind not in METRIC_KINDS:
            raise MetricError(f"Unknown metric kind {self.kind!r}; expected one of {', '.join(METRIC_KINDS)}")
        base = np.asarray(self.base, dtype=np.complex128)
        if base.ndim != 2 or base.shape[0] != base.shape[1]:
            raise MetricError(f"Metric base must be square, got shape {base.shape}")
        object.__setattr__(self, "base", base)
        if self.kind == "constant" and self.terms:
            raise MetricError("A constant metric cannot carry Fourier terms")
        for t in (base,) + tuple(t.matrix for t in self.terms):
            m = np.asarray(t, dtype=np.complex128)
            if m.shape != base.shape:
                raise MetricError(f"Metric term of shape {m.shape} does not match base {base.shape}")
            if float(np.max(np.abs(m - m.conj().T))) > 1e-14 * max(1.0, float(np.max(np.abs(m)))):
                raise MetricError("Metric base and terms must be Hermitian")

    @property
    def n(self) -> int:
        return int(self.base.shape[0])

    @property
    def band(self) -> int:
        return max((max(abs(x) for x in t.k) for t in self.terms), default=0)

    @classmethod
    def constant(cls, h=None, n: Optional[int] = None) -> "MetricSpec":
        if h is None:
            if n is None:
                raise MetricError("constant metric needs a matrix or a dimension")
            h = np.eye(n)
        return cls(np.asarray(h, dtype=np.complex128))

    def field(self, coords: Sequence[np.ndarray], shape: Tuple[int, ...]) -> np.ndarray:
        """The matrix field, shape ``(n, n) + grid shape``."""
        n = self.n
        out = np.empty((n, n) + shape, dtype=np.complex128)
        out[...] = self.base.reshape((n, n) + (1,) * len(shape))
        for term in self.terms:
            if len(term.k) != len(coords):
                raise DimensionError(f"Metric term wavevector {term.k} needs {len(coords)} entries")
            theta = sum(kk * c for kk, c in zip(term.k, coords) if kk)
            wave = np.cos(theta) if term.func == "cos" else np.sin(theta)
            out += np.asarray(term.matrix, dtype=np.complex128).reshape((n, n) + (1,) * len(shape)) * wave
        return out


def _axis(j: int, n: int) -> Tuple[int, ...]:
    k = [0] * (2 * n)
    k[j] = 1
    return tuple(k)


def bundle_like_metric(
    n: int,
    r: int,
    amplitude: float = 0.1,
    control: bool = False,
    kind: str = "inverse-band-limited",
) -> MetricSpec:
    """Product metric on ``C^r x C^(n-r)``.

    The N-block varies with ``x1`` (only when ``r == 1``, which keeps it Kähler)
    and the F-block with ``x_{r+1}``. With ``control`` the two dependencies are
    swapped, which breaks the bundle-like property.
    """
    if not 1 <= r < n:
        raise PreconditionError(f"partition r={r} must satisfy 1 <= r < n={n}")
    n_axis, f_axis = 0, 2 * r
    if control:
        n_axis, f_axis = f_axis, n_axis
    terms: List[MetricTerm] = []
    if r == 1 or control:
        m = np.zeros((n, n))
        m[:r, :r] = np.eye(r)
        terms.append(MetricTerm(m, _axis(n_axis, n)))
    m = np.zeros((n, n))
    m[r:, r:] = np.eye(n - r)
    terms.append(MetricTerm(m, _axis(f_axis, n)))
    scaled = tuple(MetricTerm(t.matrix * amplitude, t.k, t.func) for t in terms)
    return MetricSpec(np.eye(n), scaled, kind)


def band_budget(b_form: int, f_coeff: int) -> int:
    """Smallest grid size keeping every product in the identity suites unaliased."""
    return 2 * (b_form + 2 * f_coeff) + 1


def _stack(field_: np.ndarray) -> np.ndarray:
    """``(n, n) + shape`` to ``shape + (n, n)``."""
    return np.moveaxis(np.moveaxis(field_, 0, -1), 0, -1)


@dataclass(frozen=True, eq=False)
class GridComplex:
    """Forms on the ``size^(2n)`` periodic grid with a pointwise Hermitian metric."""

    n: int
    size: int
    bands: Tuple[int, int]
    metric: MetricSpec
    coords: Tuple[np.ndarray, ...] = field(repr=False)
    vol: np.ndarray = field(repr=False)
    h_minors: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], np.ndarray] = field(repr=False)
    hinv_minors: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], np.ndarray] = field(repr=False)
    dz_mult: Tuple[np.ndarray, ...] = field(repr=False)
    dzbar_mult: Tuple[np.ndarray, ...] = field(repr=False)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.size,) * (2 * self.n)

    @property
    def points(self) -> int:
        return self.size ** (2 * self.n)

    @property
    def cell_volume(self) -> float:
        return (2 * np.pi / self.size) ** (2 * self.n)

    @property
    def algebra(self) -> ExteriorAlgebra:
        return ExteriorAlgebra(self.n)

    @property
    def dims(self) -> Dict[Bidegree, int]:
        """Dimensions of the dense components, for materialized operators."""
        return {key: self.points * d for key, d in self.algebra.dims().items()}

    def dim(self, p: int, q: int) -> int:
        return self.dims.get((p, q), 0)

    def h(self, j: int, k: int) -> np.ndarray:
        return self.h_minors[((j,), (k,))]

    def hinv(self, j: int, k: int) -> np.ndarray:
        return self.hinv_minors[((j,), (k,))]

    def refined(self, factor: int = 2) -> "GridComplex":
        return build_grid(self.n, self.size * factor, self.metric, self.bands)

    # spectral derivatives

    def _spectral(self, f: np.ndarray, j: int, mult: np.ndarray) -> np.ndarray:
        axes = (2 * j, 2 * j + 1)
        return np.fft.ifftn(np.fft.fftn(f, axes=axes) * mult, axes=axes)

    def d_dz(self, f: np.ndarray, j: int) -> np.ndarray:
        return self._spectral(f, j, self.dz_mult[j])

    def d_dzbar(self, f: np.ndarray, j: int) -> np.ndarray:
        return self._spectral(f, j, self.dzbar_mult[j])

    def d_dz_flat_adjoint(self, f: np.ndarray, j: int) -> np.ndarray:
        return self._spectral(f, j, np.conj(self.dz_mult[j]))

    def d_dzbar_flat_adjoint(self, f: np.ndarray, j: int) -> np.ndarray:
        return self._spectral(f, j, np.conj(self.dzbar_mult[j]))

    # fields

    def trig_field(self, terms: Iterable) -> np.ndarray:
        """``Re sum c exp(i k.x)`` for terms carrying ``k`` and ``c``."""
        out = np.zeros(self.shape)
        for term in terms:
            if len(term.k) != 2 * self.n:
                raise DimensionError(f"wavevector {term.k} needs {2 * self.n} entries")
            theta = np.zeros(self.shape) + sum(kk * c for kk, c in zip(term.k, self.coords) if kk)
            out += np.real(complex(term.c) * np.exp(1j * theta))
        return out

    def band_limited(self, coeffs: np.ndarray) -> np.ndarray:
        """Grid samples of ``sum_k c_k exp(i k.x)`` for a centred coefficient box."""
        b = (coeffs.shape[0] - 1) // 2
        if 2 * b + 1 > self.size:
            raise AliasingRiskError(f"coefficient box of half-width {b} does not fit a grid of size {self.size}")
        idx = np.arange(-b, b + 1) % self.size
        spec = np.zeros(self.shape, dtype=np.complex128)
        spec[np.ix_(*([idx] * (2 * self.n)))] = coeffs * self.points
        return np.fft.ifftn(spec)

    def random_form(self, rng: np.random.Generator, p: int, q: int, band: Optional[int] = None) -> GridForm:
        """Random band-limited ``(p,q)``-form; the same ``rng`` state gives the same continuum form on any grid."""
        b = self.bands[0] if band is None else band
        box = (2 * b + 1,) * (2 * self.n)
        out: GridForm = {}
        for m in self.algebra.basis(p, q):
            c = (rng.standard_normal(box) + 1j * rng.standard_normal(box)) / np.sqrt(2 * np.prod(box))
            out[m] = self.band_limited(c)
        return out

    def random_vector_field(self, rng: np.random.Generator, band: Optional[int] = None) -> Tuple[np.ndarray, ...]:
        form = self.random_form(rng, 1, 0, band)
        return tuple(form[(j,)] for j in range(self.n))

    def omega(self, block: Optional[Sequence[int]] = None) -> GridForm:
        """``omega`` or, for a block of coordinates, its restriction ``omega_block``."""
        idx = range(self.n) if block is None else block
        out: GridForm = {}
        for j in idx:
            for k in idx:
                c = 1j * np.conj(self.hinv(j, k))
                if np.any(c):
                    out[(j, k + self.n)] = c
        return out

    # metric

    def _minor(self, minors, rows: Tuple[int, ...], cols: Tuple[int, ...]):
        return minors[(rows, cols)] if rows else 1.0

    def gram_apply(self, u: Mapping[Monomial, np.ndarray], inverse: bool = False) -> GridForm:
        """Pointwise ``G u`` (or ``G^{-1} u``) including the volume density."""
        minors = self.hinv_minors if inverse else self.h_minors
        weight = 1.0 / self.vol if inverse else self.vol
        alg = self.algebra
        groups: Dict[Bidegree, List[Monomial]] = {}
        for m in u:
            groups.setdefault(alg.bidegree(m), []).append(m)
        out: GridForm = {}
        for (p, q), mons in groups.items():
            for mb in alg.basis(p, q):
                ib, jb = _split(mb, self.n)
                acc = None
                for ma in mons:
                    ia, ja = _split(ma, self.n)
                    g = self._minor(minors, ia, ib) * np.conj(self._minor(minors, ja, jb))
                    term = g * u[ma]
                    acc = term if acc is None else acc + term
                out[mb] = acc * weight
        return out

    def inner(self, u: Mapping[Monomial, np.ndarray], v: Mapping[Monomial, np.ndarray]) -> complex:
        gu = self.gram_apply(u)
        total = sum(complex(np.vdot(v[m], x)) for m, x in gu.items() if m in v)
        return total * self.cell_volume

    def norm(self, u: Mapping[Monomial, np.ndarray]) -> float:
        if not u:
            return 0.0
        return float(np.sqrt(max(self.inner(u, u).real, 0.0)))

    def to_vector(self, u: Mapping[Monomial, np.ndarray], p: int, q: int) -> np.ndarray:
        parts = [np.asarray(u[m]).ravel() if m in u else np.zeros(self.points) for m in self.algebra.basis(p, q)]
        return np.concatenate(parts).astype(np.complex128) if parts else np.zeros(0, dtype=np.complex128)

    def from_vector(self, vec: np.ndarray, p: int, q: int) -> GridForm:
        basis = self.algebra.basis(p, q)
        if vec.shape[0] != len(basis) * self.points:
            raise DimensionError(f"vector of length {vec.shape[0]} is not a ({p},{q}) grid form")
        return {m: vec[i * self.points:(i + 1) * self.points].reshape(self.shape) for i, m in enumerate(basis)}


def _minors(stacked: np.ndarray, n: int) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], np.ndarray]:
    out = {}
    for s in range(1, n + 1):
        for rows in combinations(range(n), s):
            for cols in combinations(range(n), s):
                sub = stacked[..., list(rows), :][..., list(cols)]
                out[(rows, cols)] = sub[..., 0, 0].copy() if s == 1 else np.linalg.det(sub)
    return out


def build_grid(
    n: int,
    size: int,
    metric: Optional[MetricSpec] = None,
    bands: Tuple[int, int] = (2, 1),
) -> GridComplex:
    """Grid of ``size`` points per real axis with the given metric field.

    Raises:
        AliasingRiskError: if ``size`` is below the band budget of ``bands`` or
            the metric has Fourier modes outside the coefficient band
        MetricError: if the metric is not positive definite at some point
    """
    if n < 1:
        raise DimensionError(f"complex dimension must be positive, got {n}")
    b_form, f_coeff = (int(x) for x in bands)
    if b_form < 0 or f_coeff < 0:
        raise AliasingRiskError(f"bands must be non-negative, got {bands}")
    need = band_budget(b_form, f_coeff)
    if size < need:
        raise AliasingRiskError(
            f"grid size {size} is below the band budget {need} for b_form={b_form}, f_coeff={f_coeff}"
        )
    metric = metric if metric is not None else MetricSpec.constant(n=n)
    if metric.n != n:
        raise DimensionError(f"metric is {metric.n}x{metric.n} but the grid has complex dimension {n}")
    if metric.band > f_coeff:
        raise AliasingRiskError(f"metric has Fourier modes up to {metric.band}, above f_coeff={f_coeff}")

    shape = (size,) * (2 * n)
    axis = 2 * np.pi * np.arange(size) / size
    coords = tuple(np.meshgrid(*([axis] * (2 * n)), indexing="ij", sparse=True))
    raw = _stack(metric.field(coords, shape))
    if metric.kind == "inverse-band-limited":
        h = raw
    else:
        h = np.conj(np.linalg.inv(raw))
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    eig = np.linalg.eigvalsh(h)
    lowest = eig[..., 0]
    if float(lowest.min()) <= 1e-12 * float(np.abs(eig).max()):
        point = np.unravel_index(int(np.argmin(lowest)), shape)
        raise MetricError(f"metric is not positive definite at grid point {tuple(int(x) for x in point)}")
    hinv = np.linalg.inv(h)
    vol = 1.0 / np.real(np.linalg.det(h))

    k = np.fft.fftfreq(size) * size
    kx, ky = k[:, None], k[None, :]
    dz, dzbar = [], []
    for j in range(n):
        mult_shape = [1] * (2 * n)
        mult_shape[2 * j] = size
        mult_shape[2 * j + 1] = size
        # d/dz = (d/dx - i d/dy) / 2, d/dzbar = (d/dx + i d/dy) / 2
        dz.append((0.5 * (1j * kx + ky)).reshape(mult_shape))
        dzbar.append((0.5 * (1j * kx - ky)).reshape(mult_shape))

    grid = GridComplex(
        n=n,
        size=size,
        bands=(b_form, f_coeff),
        metric=metric,
        coords=coords,
        vol=vol,
        h_minors=_minors(h, n),
        hinv_minors=_minors(hinv, n),
        dz_mult=tuple(dz),
        dzbar_mult=tuple(dzbar),
    )
    logger.debug("Built %s grid n=%d size=%d bands=%s", metric.kind, n, size, grid.bands)
    return grid
