from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

from . import __version__
from .certificates import (
    IDENTITY_IDS,
    certify_e1,
    certify_e2,
    gap_and_bound,
    identity_suite,
    metric_search,
    sharp_gap_analysis,
    torsion_operators,
)
from .config import RunConfig
from .errors import ConfigurationError, HodgeLabError, TheoremViolationError, exit_code_for
from .foliation import (
    build_foliated_package,
    kernel_sum_hypothesis,
    nf_hodge_iso_check,
    nf_implication_chain_check,
    nf_pages_and_degeneration,
    nf_soundness,
    product_metric,
)
from .grid import (
    FOLIATION_IDENTITY_IDS,
    WITTEN_IDENTITY_IDS,
    MetricSpec,
    build_grid,
    bundle_like_metric,
    foliation_grid_suite,
    parse_phi,
    witten_hodge_decomposition_check,
    witten_identity_suite,
)
from .hodge import (
    build_hodge_package,
    build_metric,
    e2_quotient_dims,
    hodge_iso_e2_check,
    kernel_formula_residual,
    laplacian_quadratic_check,
    metric_classify,
)
from .linalg import Backend, RankPolicy
from .models import DoubleComplex, StructureEquations, build_double_complex, foliated_split, resolve_model
from .spectral import backend_agreement, degeneration_index
from .utils import child_seeds, get_logger, make_rng, max_workers, random_hermitian_pd

logger = get_logger(__name__)

SCHEMA_VERSION = 1
SUITE_MODELS: Tuple[str, ...] = (
    "builtin:torus3",
    "builtin:iwasawa",
    "builtin:kodaira_thurston",
    "builtin:heisenberg_plus_abelian",
    "builtin:heisenberg_sum",
)
DEFAULT_PHI = "cos(x1)+sin(y1)"


def _key(key: Tuple[int, int]) -> str:
    return f"{key[0]},{key[1]}"


@dataclass(frozen=True)
class Failure:
    stage: str
    message: str
    exit_code: int

    def as_dict(self) -> Dict[str, Any]:
        return {"stage": self.stage, "message": self.message, "exit_code": self.exit_code}


@dataclass
class ReportDocument:
    config: RunConfig
    pages: Dict[str, Any] = field(default_factory=dict)
    hodge: Dict[str, Any] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)
    foliation: Dict[str, Any] = field(default_factory=dict)
    identities: Dict[str, Any] = field(default_factory=dict)
    suite: Dict[str, Any] = field(default_factory=dict)
    timing_ms: Dict[str, float] = field(default_factory=dict)
    failures: List[Failure] = field(default_factory=list)
    version: str = __version__

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def exit_code(self) -> int:
        return max((f.exit_code for f in self.failures), default=0)

    def to_dict(self) -> Dict[str, Any]:
        from .report import serialize

        return serialize(
            {
                "schema_version": SCHEMA_VERSION,
                "version": self.version,
                "config": self.config.model_dump(mode="json"),
                "pages": self.pages,
                "hodge": self.hodge,
                "certificates": self.certificates,
                "foliation": self.foliation,
                "identities": self.identities,
                "suite": self.suite,
                "failures": [f.as_dict() for f in self.failures],
                "timing_ms": self.timing_ms,
            }
        )

    def to_text(self) -> str:
        lines: List[str] = [f"OK: {self.ok}", f"Command: {self.config.command}"]
        for label, payload in self.pages.items():
            lines.append(f"{label}: degenerates at E_{payload['degeneration_index']} (b = {payload['betti']})")
        for label, payload in self.identities.items():
            failing = payload.get("failing") or [r["identity"] for r in payload.get("identities", []) if not r["ok"]]
            lines.append(f"{label}: identities ok={payload['ok']} failing={failing}")
        for label, payload in self.certificates.items():
            fired = [c["name"] for c in payload.get("e2", []) + payload.get("e1", []) if c["fired"]]
            lines.append(f"{label}: certificates fired {fired}")
        for f in self.failures:
            lines.append(f"  - FAIL {f.stage}: {f.message}")
        if self.suite.get("coverage_text"):
            lines.append(self.suite["coverage_text"])
        return "\n".join(lines)

    def to_json(self, path: Optional[str] = None) -> str:
        from .report import emit_report

        return emit_report(self, path)

    def to_html(self, path: Optional[str] = None) -> str:
        from .report import render_html

        return render_html(self, path=path)


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def _policy(config: RunConfig) -> RankPolicy:
    return RankPolicy(rel_tol=config.tolerances.rank_rel)


def load_complex(model: str, backend: str = "exact") -> Tuple[StructureEquations, DoubleComplex]:
    eq = resolve_model(model)
    k = build_double_complex(eq, Backend.FLOAT if backend == "float" else Backend.EXACT)
    return eq, k


def pages_payload(k: DoubleComplex, config: RunConfig) -> Dict[str, Any]:
    policy = _policy(config)
    conv = degeneration_index(k, max_page=config.max_page, policy=policy)
    out: Dict[str, Any] = {
        "model": k.label,
        "n": k.n,
        "backend": k.backend.value,
        "degeneration_index": conv.degeneration_index,
        "betti": conv.betti,
        "dims": {f"E{r}": conv.page(r).dims_by_key() for r in sorted(conv.pages) if r <= max(config.max_page, 1)},
    }
    if config.backend == "both":
        backend_agreement(k, max_page=min(config.max_page, 2), policy=policy)
        out["backend_agreement"] = True
    return out


def metric_matrix(config: RunConfig, eq: StructureEquations):
    """Coframe Gram for the run: identity, the model's ``[metric]`` block or a seeded random one."""
    if config.metric == "model":
        if eq.metric is None:
            logger.warning("%s has no [metric] block; using the identity", eq.label)
        return eq.metric
    if config.metric == "random":
        return random_hermitian_pd(make_rng(config.seed), eq.n)
    return None


def hodge_payload(k: DoubleComplex, h, config: RunConfig, e2=None) -> Tuple[Dict[str, Any], Any, Any]:
    tol = config.tolerances
    metric = build_metric(k, h)
    pkg = build_hodge_package(k, metric, tol.harmonic_rel, tol.decomposition, _policy(config))
    flags = metric_classify(k, metric, pkg)
    iso = hodge_iso_e2_check(k, pkg, e2=e2, tol=tol.decomposition)
    formula = kernel_formula_residual(pkg, trials=100, seed=config.seed)
    quadratic = laplacian_quadratic_check(pkg, trials=20, seed=config.seed)
    quotient = e2_quotient_dims(k, pkg)
    worst = max(formula.values(), default=0.0)
    if worst > tol.identity_float:
        raise TheoremViolationError(f"{k.label}: kernel formula for Lap'_{{p''}} off by {worst:.3e}")
    worst_q = max(quadratic.values(), default=0.0)
    if worst_q > tol.identity_float:
        raise TheoremViolationError(f"{k.label}: <Lap g, g> = <Lap' g, g> + <Lap'' g, g> off by {worst_q:.3e}")
    payload = {
        "flags": flags.as_dict(),
        "stokes": flags.stokes,
        "iso": iso.summary,
        "kernel_formula": {_key(key): v for key, v in sorted(formula.items())},
        "quadratic": {_key(key): v for key, v in sorted(quadratic.items())},
        "e2_quotient": {_key(key): v for key, v in sorted(quotient.items())},
    }
    return payload, pkg, flags


def certify_payload(k: DoubleComplex, pkg, flags, index: int, config: RunConfig) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    tp = torsion_operators(k, pkg)
    ids = identity_suite(k, pkg, tp, trials=5, seed=config.seed, tol=config.tolerances.identity_float)
    e2 = certify_e2(k, pkg, tp, flags=flags, index=index)
    e1 = certify_e1(k, pkg, tp, flags=flags, index=index)
    gaps = {_key(key): gap_and_bound(k, pkg, tp, *key).as_dict() for key in k.components()}
    sharp = sharp_gap_analysis(k, pkg, tp, flags)
    payload: Dict[str, Any] = {
        "degeneration_index": index,
        "e2": [r.to_dict() for r in e2],
        "e1": [r.to_dict() for r in e1],
        "gaps": gaps,
        "sharp_gap": sharp.summary,
    }
    if config.explore:
        hits = metric_search(k, samples=config.explore, seed=config.seed, index=index)
        payload["explore"] = [{"sample": h.sample, "seed": h.seed, "SKT": h.skt, "fired": list(h.fired)} for h in hits]
    return payload, ids.summary


def _partition(config: RunConfig, eq: StructureEquations) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    if config.partition is not None:
        n_part, f_part = config.partition
        if max(n_part + f_part) > eq.n:
            raise ConfigurationError(f"partition {config.partition} exceeds the coframe of {eq.label} (n={eq.n})")
        return tuple(i - 1 for i in n_part), tuple(i - 1 for i in f_part)
    if eq.foliation is None:
        raise ConfigurationError(f"{eq.label} has no [foliation] block; pass --partition")
    return eq.foliation


def foliate_payload(k: DoubleComplex, eq: StructureEquations, config: RunConfig) -> Dict[str, Any]:
    n_idx, f_idx = _partition(config, eq)
    fk = foliated_split(k, n_idx, f_idx)
    h = eq.metric if config.metric == "model" else None
    fpkg = build_foliated_package(fk, product_metric(fk, h), config.tolerances.harmonic_rel, policy=_policy(config))
    hypothesis = kernel_sum_hypothesis(fk, fpkg, seed=config.seed)
    pages = nf_pages_and_degeneration(fk, fpkg, max_page=max(config.max_page, 2))
    iso = nf_hodge_iso_check(fk, fpkg, hypothesis, e2=pages.pages[2], tol=config.tolerances.decomposition)
    chain = nf_implication_chain_check(fk, fpkg, hypothesis, seed=config.seed)
    nf_soundness(fk, iso, pages)
    return {
        "partition": {"N": [i + 1 for i in n_idx], "F": [i + 1 for i in f_idx]},
        "degeneration_index": pages.degeneration_index,
        "holomorphic_cohomology": pages.holomorphic_cohomology,
        "dims": {f"E{r}": t.dims_by_key() for r, t in sorted(pages.pages.items())},
        "kernel_sum": hypothesis.summary,
        "iso": iso.summary,
        "implications": chain.as_dict(),
    }


def witten_payload(config: RunConfig, eq: Optional[StructureEquations] = None) -> Dict[str, Any]:
    ws = config.witten
    tol = config.tolerances
    if ws.phi is not None:
        terms = parse_phi(ws.phi, ws.n)
    elif eq is not None and eq.witten_phi:
        terms = eq.witten_phi
    else:
        terms = parse_phi(DEFAULT_PHI, ws.n)
    spec = MetricSpec.constant(n=ws.n) if ws.metric == "flat" else bundle_like_metric(ws.n, 1)
    grid = build_grid(ws.n, ws.grid, spec, ws.bands)
    report = witten_identity_suite(
        grid,
        terms,
        trials=ws.trials,
        seed=config.seed,
        refine=ws.refine,
        exact_tol=tol.grid_exact,
        spectral_tol=tol.grid_spectral,
    )
    out: Dict[str, Any] = dict(report.summary)
    out["phi"] = [{"k": list(t.k), "c": t.c} for t in terms]
    if ws.decompose:
        small = build_grid(1, 8, MetricSpec.constant(n=1), (1, 1))
        out["decomposition"] = witten_hodge_decomposition_check(small, terms, tol=tol.decomposition).summary
    return out


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


@dataclass
class SuiteEntry:
    label: str
    payloads: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    coverage: Dict[str, str] = field(default_factory=dict)
    failures: List[Failure] = field(default_factory=list)
    timing_ms: Dict[str, float] = field(default_factory=dict)


@contextmanager
def _stage(entry: SuiteEntry, name: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    except HodgeLabError as exc:
        logger.warning("%s: stage %s failed: %s", entry.label, name, exc)
        entry.failures.append(Failure(f"{entry.label}:{name}", str(exc), exit_code_for(exc)))
    finally:
        entry.timing_ms[f"{entry.label}:{name}"] = (time.perf_counter() - start) * 1000.0


def _record_grid(entry: SuiteEntry, summary: Dict[str, Any]) -> None:
    for r in summary["identities"]:
        entry.coverage[r["identity"]] = ("pass" if r["ok"] else "fail") if r["asserted"] else "reported"


def _suite_model(model: str, config: RunConfig) -> SuiteEntry:
    entry = SuiteEntry(model.split(":", 1)[-1])
    eq = resolve_model(model)
    # above max_exact_n every stage runs on the float backend
    exact_stages = eq.n <= config.max_exact_n
    backend = "float" if config.backend == "float" or not exact_stages else "exact"
    k = build_double_complex(eq, Backend.FLOAT if backend == "float" else Backend.EXACT)
    index = None
    e2 = None
    with _stage(entry, "pages"):
        conv = degeneration_index(k, max_page=config.max_page, policy=_policy(config))
        index, e2 = conv.degeneration_index, conv.page(2)
        entry.payloads["pages"] = {
            "degeneration_index": index,
            "betti": conv.betti,
            "dims": {f"E{r}": conv.page(r).dims_by_key() for r in (1, 2)},
        }
        if backend == "exact":
            backend_agreement(k, max_page=2, policy=_policy(config))
            entry.payloads["pages"]["backend_agreement"] = True
        entry.payloads["pages"]["backend"] = backend
    if index is not None:
        samples = [None] + list(child_seeds(config.seed, config.random_metrics))
        fired: Dict[str, int] = {}
        for i, sample in enumerate(samples):
            label = "identity" if sample is None else f"random{i}"
            with _stage(entry, f"hodge[{label}]"):
                h = None if sample is None else random_hermitian_pd(make_rng(sample), eq.n)
                payload, pkg, flags = hodge_payload(k, h, config, e2=e2)
                cert, ids = certify_payload(k, pkg, flags, index, config.model_copy(update={"explore": 0}))
                for c in cert["e2"] + cert["e1"]:
                    if c["fired"]:
                        fired[c["name"]] = fired.get(c["name"], 0) + 1
                if sample is None:
                    entry.payloads["hodge"] = payload
                    entry.payloads["certificates"] = cert
                    entry.payloads["identities"] = ids
                    for name in IDENTITY_IDS:
                        if name in ids["residuals"]:
                            ok = name not in ids["failing"]
                            entry.coverage[name] = ("pass" if ok else "fail") if ids["asserted"] else "reported"
        entry.payloads.setdefault("certificates", {})["fired_counts"] = fired
    if eq.foliation is not None:
        with _stage(entry, "foliation"):
            entry.payloads["foliation"] = foliate_payload(k, eq, config.model_copy(update={"partition": None}))
    logger.info("suite: %s done with %d failures", entry.label, len(entry.failures))
    return entry


def _suite_grids(config: RunConfig) -> List[SuiteEntry]:
    tol = config.tolerances
    entries: List[SuiteEntry] = []
    for n in (1, 2):
        entry = SuiteEntry(f"witten-n{n}")
        with _stage(entry, "identities"):
            grid = build_grid(n, config.witten.grid, MetricSpec.constant(n=n), config.witten.bands)
            report = witten_identity_suite(
                grid,
                parse_phi(DEFAULT_PHI, n),
                trials=config.witten.trials,
                seed=config.seed,
                exact_tol=tol.grid_exact,
                spectral_tol=tol.grid_spectral,
            )
            entry.payloads["identities"] = report.summary
            _record_grid(entry, report.summary)
            if not report.ok:
                entry.failures.append(Failure(f"{entry.label}:identities", "Witten identity suite failed", 2))
        if n == 1:
            with _stage(entry, "decomposition"):
                small = build_grid(1, 8, MetricSpec.constant(n=1), (1, 1))
                entry.payloads["decomposition"] = witten_hodge_decomposition_check(
                    small, parse_phi("cos(x1)", 1), tol=tol.decomposition
                ).summary
        entries.append(entry)

    fg = config.foliation_grid
    entry = SuiteEntry(f"foliation-grid-n{fg.n}")
    with _stage(entry, "identities"):
        grid = build_grid(fg.n, fg.grid, bundle_like_metric(fg.n, fg.r), fg.bands)
        report = foliation_grid_suite(
            grid, fg.r, trials=fg.trials, seed=config.seed, exact_tol=tol.grid_exact, spectral_tol=tol.grid_spectral
        )
        entry.payloads["identities"] = report.summary
        _record_grid(entry, report.summary)
        if not report.ok:
            entry.failures.append(Failure(f"{entry.label}:identities", "foliation grid suite failed", 2))
    entries.append(entry)
    return entries


def run_suite(config: RunConfig, models: Optional[List[str]] = None, grids: bool = True) -> ReportDocument:
    from .report import coverage_matrix

    doc = ReportDocument(config=config)
    models = list(models) if models is not None else ([config.model] if config.model else list(SUITE_MODELS))
    workers = min(max_workers(), max(len(models), 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda m: _suite_model(m, config), models))
    else:
        entries = [_suite_model(m, config) for m in models]
    if grids:
        entries += _suite_grids(config)

    for entry in entries:
        for section, payload in entry.payloads.items():
            target = {
                "pages": doc.pages,
                "hodge": doc.hodge,
                "certificates": doc.certificates,
                "foliation": doc.foliation,
            }.get(section, doc.identities)
            key = entry.label if section in ("pages", "hodge", "certificates", "foliation", "identities") else f"{entry.label}:{section}"
            target[key] = payload
        doc.failures.extend(entry.failures)
        if config.timing:
            doc.timing_ms.update(entry.timing_ms)

    ids = list(IDENTITY_IDS) + [i for i in WITTEN_IDENTITY_IDS + FOLIATION_IDENTITY_IDS if i not in IDENTITY_IDS]
    matrix = coverage_matrix({e.label: e.coverage for e in entries}, ids)
    doc.suite = {
        "models": [e.label for e in entries],
        "ok": doc.ok,
        "failures": len(doc.failures),
        "coverage": matrix.to_dict(orient="index"),
        "coverage_text": matrix.to_string(),
    }
    return doc


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _timed(doc: ReportDocument, name: str, fn: Callable[[], Any]) -> Any:
    start = time.perf_counter()
    out = fn()
    if doc.config.timing:
        doc.timing_ms[name] = (time.perf_counter() - start) * 1000.0
    return out


def run(config: RunConfig) -> ReportDocument:
    """Execute one command and return its report; JSON/HTML artifacts are written when requested.

    Input problems and theorem violations propagate as ``HodgeLabError``
    subclasses, except in ``suite``, which aggregates them as failures.
    """
    logger.info("hodgelab %s: %s on %s", __version__, config.command, config.model or "builtin suite")
    if config.command == "suite":
        doc = run_suite(config)
    else:
        doc = ReportDocument(config=config)
        command = config.command
        if command == "witten":
            eq = resolve_model(config.model) if config.model else None
            payload = _timed(doc, "witten", lambda: witten_payload(config, eq))
            doc.identities["witten"] = payload
            if not payload["ok"]:
                failing = [r["identity"] for r in payload["identities"] if not r["ok"]]
                failing += [name for name, passed in payload["checks"].items() if not passed]
                doc.failures.append(Failure("witten", f"failing: {failing}", 2))
        else:
            eq, k = load_complex(config.model, config.backend)
            label = k.label
            doc.pages[label] = _timed(doc, "pages", lambda: pages_payload(k, config))
            if command in ("hodge", "certify"):
                h = metric_matrix(config, eq)
                payload, pkg, flags = _timed(doc, "hodge", lambda: hodge_payload(k, h, config))
                doc.hodge[label] = payload
                if command == "certify":
                    index = doc.pages[label]["degeneration_index"]
                    cert, ids = _timed(doc, "certify", lambda: certify_payload(k, pkg, flags, index, config))
                    doc.certificates[label] = cert
                    doc.identities[label] = ids
            elif command == "foliate":
                doc.foliation[label] = _timed(doc, "foliate", lambda: foliate_payload(k, eq, config))
    if config.output:
        doc.to_json(config.output)
    if config.html_output:
        doc.to_html(config.html_output)
    return doc
