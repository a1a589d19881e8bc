"""Structure equations of invariant coframes and the model file format.

A model is a complex Lie algebra given by the differentials of a (1,0)
coframe ``w1..wn``::

    [model]
    n = 3
    generators = ["w1", "w2", "w3"]

    [d]
    w3 = [{coeff = "-1", wedge = ["w1", "w2"]}]

    [metric]                      # optional
    g = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]

    [foliation]                   # optional
    N = ["w1", "w2", "w3"]
    F = ["w4"]

    [witten]                      # optional, grid module only
    phi = [{k = [1, 0], c = "0.5"}]

Wedge pairs are either two holomorphic labels or one holomorphic and one
conjugate label (``wkbar``). Two conjugate labels would be a (0,2) term,
which the format rejects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ModelLookupError, SchemaError
from ..linalg import GaussianRational, exact_array, gr

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

Coefficients = Dict[int, Dict[Tuple[int, int], GaussianRational]]


@dataclass(frozen=True)
class WittenTerm:
    """One Fourier term ``c * exp(i k.x)`` of the weight function; real part is taken downstream."""

    k: Tuple[int, ...]
    c: complex


@dataclass(frozen=True, eq=False)
class StructureEquations:
    """Differentials of the (1,0) coframe.

    ``d20[i][(j, k)]`` is the coefficient of ``w_j ^ w_k`` (``j < k``) in
    ``d w_i``; ``d11[i][(j, k)]`` the coefficient of ``w_j ^ conj(w_k)``.
    Indices are 0-based.
    """

    n: int
    names: Tuple[str, ...]
    d20: Mapping[int, Mapping[Tuple[int, int], GaussianRational]] = field(default_factory=dict)
    d11: Mapping[int, Mapping[Tuple[int, int], GaussianRational]] = field(default_factory=dict)
    label: str = "model"
    metric: Optional[np.ndarray] = None
    foliation: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    witten_phi: Tuple[WittenTerm, ...] = ()

    def coefficient_count(self) -> int:
        return sum(1 for t in self.d20.values() for c in t.values() if c) + sum(
            1 for t in self.d11.values() for c in t.values() if c
        )

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"Unknown generator label {name!r}") from None


def _line_of(text: str, needle: str) -> int:
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return 0


def _resolve(label: str, names: Sequence[str]) -> Tuple[int, bool]:
    """Index of a label and whether it is a conjugate (``...bar``) label."""
    if label in names:
        return names.index(label), False
    if label.endswith("bar") and label[:-3] in names:
        return names.index(label[:-3]), True
    raise SchemaError(f"Unknown generator label {label!r}")


def parse_structure_equations(text: str, label: str = "model") -> StructureEquations:
    """Parse a model file (TOML text) into exact structure equations."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"{label}: invalid TOML: {exc}") from exc

    model = data.get("model")
    if not isinstance(model, dict) or "n" not in model:
        raise SchemaError(f"{label}: missing [model] table with n")
    n = model["n"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError(f"{label}: [model] n must be a positive integer")
    names = model.get("generators") or [f"w{i}" for i in range(1, n + 1)]
    if len(names) != n:
        raise SchemaError(f"{label}: expected {n} generators, got {len(names)}")
    if len(set(names)) != n:
        raise SchemaError(f"{label}: generator labels must be unique")
    for name in names:
        if not isinstance(name, str) or name.endswith("bar"):
            raise SchemaError(f"{label}: invalid generator label {name!r}")
    names = tuple(names)

    d20: Coefficients = {}
    d11: Coefficients = {}
    for gen, terms in (data.get("d") or {}).items():
        line = _line_of(text, gen)
        where = f"{label}, line {line}" if line else label
        try:
            i, conj_i = _resolve(gen, names)
        except SchemaError as exc:
            raise SchemaError(f"{where}: {exc}") from None
        if conj_i:
            raise SchemaError(f"{where}: differentials are given for (1,0) generators only, not {gen!r}")
        if not isinstance(terms, list):
            raise SchemaError(f"{where}: d.{gen} must be a list of terms")
        for term in terms:
            if not isinstance(term, dict) or "coeff" not in term or "wedge" not in term:
                raise SchemaError(f"{where}: each term needs 'coeff' and 'wedge'")
            wedge = term["wedge"]
            if not isinstance(wedge, list) or len(wedge) != 2:
                raise SchemaError(f"{where}: wedge must list exactly two labels")
            try:
                coeff = gr(term["coeff"]) if not isinstance(term["coeff"], float) else None
                (j, conj_j), (k, conj_k) = (_resolve(w, names) for w in wedge)
            except SchemaError as exc:
                raise SchemaError(f"{where}: {exc}") from None
            if coeff is None:
                raise SchemaError(f"{where}: coefficients must be exact (string or integer), got a float")
            if conj_j and conj_k:
                raise SchemaError(f"{where}: (0,2)-type term {wedge} in d{gen} is not allowed")
            if not conj_j and not conj_k:
                if j == k:
                    raise SchemaError(f"{where}: repeated label in wedge {wedge}")
                if j > k:
                    j, k, coeff = k, j, -coeff
                table = d20.setdefault(i, {})
            else:
                if conj_j:
                    # conj(w_j) ^ w_k = - w_k ^ conj(w_j)
                    j, k, coeff = k, j, -coeff
                table = d11.setdefault(i, {})
            if (j, k) in table:
                raise SchemaError(f"{where}: duplicate term {wedge} in d{gen}")
            table[(j, k)] = coeff

    metric = None
    if "metric" in data:
        g = data["metric"].get("g")
        if not isinstance(g, list) or len(g) != n or any(not isinstance(r, list) or len(r) != n for r in g):
            raise SchemaError(f"{label}: [metric] g must be an {n}x{n} matrix")
        metric = exact_array(g)

    foliation = None
    if "foliation" in data:
        fol = data["foliation"]
        try:
            n_idx = tuple(sorted(_resolve(w, names)[0] for w in fol.get("N", [])))
            f_idx = tuple(sorted(_resolve(w, names)[0] for w in fol.get("F", [])))
        except SchemaError as exc:
            raise SchemaError(f"{label}: [foliation] {exc}") from None
        foliation = (n_idx, f_idx)

    phi: List[WittenTerm] = []
    for term in (data.get("witten") or {}).get("phi", []):
        try:
            phi.append(WittenTerm(tuple(int(x) for x in term["k"]), complex(str(term["c"]).replace("i", "j"))))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{label}: invalid [witten] phi term {term!r}: {exc}") from None

    return StructureEquations(
        n=n,
        names=names,
        d20=d20,
        d11=d11,
        label=label,
        metric=metric,
        foliation=foliation,
        witten_phi=tuple(phi),
    )


def load_structure_equations(path: Union[str, Path]) -> StructureEquations:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"Cannot read model file {path}: {exc}") from exc
    return parse_structure_equations(text, label=str(path))


def _names(n: int) -> Tuple[str, ...]:
    return tuple(f"w{i}" for i in range(1, n + 1))


def _heisenberg_block(offset: int) -> Coefficients:
    # d w_{offset+3} = - w_{offset+1} ^ w_{offset+2}
    return {offset + 2: {(offset, offset + 1): gr(-1)}}


BUILTIN_MODELS = ("torus(n)", "iwasawa", "kodaira_thurston", "heisenberg_sum", "heisenberg_plus_abelian")

_TORUS = re.compile(r"^torus\(?(\d*)\)?$")


def builtin_model(name: str) -> StructureEquations:
    """Standard structure equations of the builtin nilmanifold models."""
    key = name.strip().lower()
    if key.startswith("builtin:"):
        key = key[len("builtin:"):]
    m = _TORUS.match(key)
    if m:
        n = int(m.group(1) or 3)
        if n < 1:
            raise ModelLookupError("torus dimension must be positive")
        return StructureEquations(n=n, names=_names(n), label=f"torus{n}")
    if key == "iwasawa":
        return StructureEquations(n=3, names=_names(3), d20=_heisenberg_block(0), label=key)
    if key == "kodaira_thurston":
        return StructureEquations(n=2, names=_names(2), d11={1: {(0, 0): gr(1)}}, label=key)
    if key == "heisenberg_sum":
        d20 = {**_heisenberg_block(0), **_heisenberg_block(3)}
        return StructureEquations(
            n=6, names=_names(6), d20=d20, label=key, foliation=((0, 1, 2), (3, 4, 5))
        )
    if key == "heisenberg_plus_abelian":
        return StructureEquations(
            n=4, names=_names(4), d20=_heisenberg_block(0), label=key, foliation=((0, 1, 2), (3,))
        )
    raise ModelLookupError(f"Unknown builtin model {name!r}; available: {', '.join(BUILTIN_MODELS)}")


def resolve_model(spec: str) -> StructureEquations:
    """``builtin:<name>`` or a path to a model file."""
    if spec.startswith("builtin:"):
        return builtin_model(spec)
    return load_structure_equations(spec)
