from __future__ import annotations

import sys
from typing import Any, List, Optional, Tuple

import typer

from . import __version__
from .config import RunConfig
from .errors import ConfigurationError, exit_code_for
from .runner import run
from .utils import set_verbosity

app = typer.Typer(no_args_is_help=True, add_completion=False, help="hodgelab: second-page Hodge theory on finite models")

BackendOpt = typer.Option(None, "--backend", help="exact | float | both")
ConfigOpt = typer.Option(None, "--config", help="Run configuration YAML; flags override it")
JsonOpt = typer.Option(None, "--json", help="Write JSON report to path")
HtmlOpt = typer.Option(None, "--html", help="Write HTML report to path")
SeedOpt = typer.Option(None, "--seed", help="Seed for every random trial")
TimingOpt = typer.Option(None, "--timing/--no-timing", help="Record stage timings in the report")


def _parse_ints(text: str, what: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"{what} must be comma-separated integers, got {text!r}") from exc


def parse_partition(text: Optional[str]) -> Optional[Tuple[List[int], List[int]]]:
    """``"1,2,3|4"``: 1-based coframe positions of the N block, then the F block."""
    if text is None:
        return None
    if text.count("|") != 1:
        raise ConfigurationError(f"--partition must look like '1,2,3|4', got {text!r}")
    n_part, f_part = text.split("|")
    return _parse_ints(n_part, "--partition"), _parse_ints(f_part, "--partition")


def parse_bands(text: Optional[str]) -> Optional[Tuple[int, int]]:
    if text is None:
        return None
    values = _parse_ints(text, "--bands")
    if len(values) != 2:
        raise ConfigurationError(f"--bands needs two integers 'b_form,f_coeff', got {text!r}")
    return values[0], values[1]


def _execute(command: str, config_path: Optional[str], **overrides: Any) -> None:
    try:
        config = RunConfig.merged(command, config_path, **overrides)
        doc = run(config)
        typer.echo(doc.to_text())
        if config.output:
            typer.echo(f"Wrote JSON: {config.output}")
        if config.html_output:
            typer.echo(f"Wrote HTML: {config.html_output}")
        raise typer.Exit(code=doc.exit_code)
    except typer.Exit:
        raise
    except Exception as exc:  # noqa: BLE001
        typer.echo(f"Error: {exc}")
        raise typer.Exit(code=exit_code_for(exc))


@app.command()
def version() -> None:
    """Print hodgelab version."""
    typer.echo(__version__)


@app.command(help="Dimensions of every Frölicher page and the degeneration index")
def pages(
    model: Optional[str] = typer.Option(None, "--model", help="builtin:<name> or a model TOML path"),
    max_page: Optional[int] = typer.Option(None, "--max-page", help="Report pages up to this one"),
    backend: Optional[str] = BackendOpt,
    seed: Optional[int] = SeedOpt,
    json_out: Optional[str] = JsonOpt,
    html: Optional[str] = HtmlOpt,
    timing: Optional[bool] = TimingOpt,
    config: Optional[str] = ConfigOpt,
) -> None:
    _execute(
        "pages", config, model=model, max_page=max_page, backend=backend, seed=seed,
        output=json_out, html_output=html, timing=timing,
    )  # fmt: skip


@app.command(help="Hodge package for a metric: harmonic representatives of E_2 and the decompositions")
def hodge(
    model: Optional[str] = typer.Option(None, "--model", help="builtin:<name> or a model TOML path"),
    metric: Optional[str] = typer.Option(None, "--metric", help="identity | model | random"),
    max_page: Optional[int] = typer.Option(None, "--max-page"),
    backend: Optional[str] = BackendOpt,
    seed: Optional[int] = SeedOpt,
    json_out: Optional[str] = JsonOpt,
    html: Optional[str] = HtmlOpt,
    timing: Optional[bool] = TimingOpt,
    config: Optional[str] = ConfigOpt,
) -> None:
    _execute(
        "hodge", config, model=model, metric=metric, max_page=max_page, backend=backend, seed=seed,
        output=json_out, html_output=html, timing=timing,
    )  # fmt: skip


@app.command(help="Degeneration certificates, identity suite and spectral gaps for a metric")
def certify(
    model: Optional[str] = typer.Option(None, "--model", help="builtin:<name> or a model TOML path"),
    metric: Optional[str] = typer.Option(None, "--metric", help="identity | model | random"),
    explore: Optional[int] = typer.Option(None, "--explore", help="Also sample K random metrics and list fired certificates"),
    max_page: Optional[int] = typer.Option(None, "--max-page"),
    backend: Optional[str] = BackendOpt,
    seed: Optional[int] = SeedOpt,
    json_out: Optional[str] = JsonOpt,
    html: Optional[str] = HtmlOpt,
    timing: Optional[bool] = TimingOpt,
    config: Optional[str] = ConfigOpt,
) -> None:
    _execute(
        "certify", config, model=model, metric=metric, explore=explore, max_page=max_page, backend=backend,
        seed=seed, output=json_out, html_output=html, timing=timing,
    )  # fmt: skip


@app.command(help="Foliated (N,F) spectral sequence, kernel-sum hypothesis and Hodge isomorphism")
def foliate(
    model: Optional[str] = typer.Option(None, "--model", help="builtin:<name> or a model TOML path"),
    partition: Optional[str] = typer.Option(None, "--partition", help="N|F coframe positions, e.g. '1,2,3|4'"),
    metric: Optional[str] = typer.Option(None, "--metric", help="identity | model"),
    max_page: Optional[int] = typer.Option(None, "--max-page"),
    backend: Optional[str] = BackendOpt,
    seed: Optional[int] = SeedOpt,
    json_out: Optional[str] = JsonOpt,
    html: Optional[str] = HtmlOpt,
    timing: Optional[bool] = TimingOpt,
    config: Optional[str] = ConfigOpt,
) -> None:
    try:
        parts = parse_partition(partition)
    except ConfigurationError as exc:
        typer.echo(f"Error: {exc}")
        raise typer.Exit(code=1)
    _execute(
        "foliate", config, model=model, partition=parts, metric=metric, max_page=max_page, backend=backend,
        seed=seed, output=json_out, html_output=html, timing=timing,
    )  # fmt: skip


@app.command(help="Witten-twisted identities on the periodic Fourier grid")
def witten(
    n: Optional[int] = typer.Option(None, "--n", help="Complex dimension of the grid torus"),
    grid: Optional[int] = typer.Option(None, "--grid", help="Points per real axis"),
    phi: Optional[str] = typer.Option(None, "--phi", help="Weight, e.g. 'cos(x1)+0.5*sin(y1)'"),
    model: Optional[str] = typer.Option(None, "--model", help="Model TOML whose [witten] phi is used"),
    bands: Optional[str] = typer.Option(None, "--bands", help="b_form,f_coeff Fourier half-widths"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Random test forms per identity"),
    grid_metric: Optional[str] = typer.Option(None, "--grid-metric", help="flat | bundle-like"),
    refine: Optional[bool] = typer.Option(None, "--refine/--no-refine", help="Refinement check for spectral identities"),
    decompose: Optional[bool] = typer.Option(None, "--decompose/--no-decompose", help="Dense three-space check on an 8-point grid"),
    seed: Optional[int] = SeedOpt,
    json_out: Optional[str] = JsonOpt,
    html: Optional[str] = HtmlOpt,
    timing: Optional[bool] = TimingOpt,
    config: Optional[str] = ConfigOpt,
) -> None:
    try:
        band_pair = parse_bands(bands)
    except ConfigurationError as exc:
        typer.echo(f"Error: {exc}")
        raise typer.Exit(code=1)
    _execute(
        "witten", config, model=model, seed=seed, output=json_out, html_output=html, timing=timing,
        witten_n=n, witten_grid=grid, witten_phi=phi, witten_bands=band_pair, witten_trials=trials,
        witten_metric=grid_metric, witten_refine=refine, witten_decompose=decompose,
    )  # fmt: skip


@app.command(help="Every builtin model and grid check, with a coverage matrix of identities")
def suite(
    model: Optional[str] = typer.Option(None, "--model", help="Restrict the model sweep to one model"),
    random_metrics: Optional[int] = typer.Option(None, "--random-metrics", help="Random metrics per model"),
    max_exact_n: Optional[int] = typer.Option(None, "--max-exact-n", help="Largest n run on the exact backend"),
    backend: Optional[str] = BackendOpt,
    seed: Optional[int] = SeedOpt,
    json_out: Optional[str] = JsonOpt,
    html: Optional[str] = HtmlOpt,
    timing: Optional[bool] = TimingOpt,
    config: Optional[str] = ConfigOpt,
) -> None:
    _execute(
        "suite", config, model=model, random_metrics=random_metrics, max_exact_n=max_exact_n, backend=backend,
        seed=seed, output=json_out, html_output=html, timing=timing,
    )  # fmt: skip


@app.callback()
def main(
    ctx: typer.Context,
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
    _version: Optional[bool] = typer.Option(
        None,
        "--version",
        help="Show version and exit",
        callback=lambda v: (typer.echo(__version__), sys.exit(0)) if v else None,
        is_eager=True,
    ),
) -> None:
    set_verbosity(verbose)


if __name__ == "__main__":
    app()
