"""Fourier-spectral periodic grid: variable metrics, Witten twisting and foliation lemmas."""

from .complex import GridComplex, MetricSpec, MetricTerm, band_budget, build_grid, bundle_like_metric
from .foliation import FOLIATION_IDENTITY_IDS, FoliationGridReport, MetricStructure, foliation_grid_suite, metric_structure
from .operators import GridIdentityReport, GridIdentityResult, GridOperator, metric_adjoint, metric_operators
from .witten import (
    WITTEN_IDENTITY_IDS,
    WittenData,
    WittenDecompositionReport,
    WittenOperators,
    parse_phi,
    witten_data,
    witten_hodge_decomposition_check,
    witten_identity_suite,
    witten_operators,
)

__all__ = [
    "FOLIATION_IDENTITY_IDS",
    "FoliationGridReport",
    "GridComplex",
    "GridIdentityReport",
    "GridIdentityResult",
    "GridOperator",
    "MetricSpec",
    "MetricStructure",
    "MetricTerm",
    "WITTEN_IDENTITY_IDS",
    "WittenData",
    "WittenDecompositionReport",
    "WittenOperators",
    "band_budget",
    "build_grid",
    "bundle_like_metric",
    "foliation_grid_suite",
    "metric_adjoint",
    "metric_operators",
    "metric_structure",
    "parse_phi",
    "witten_data",
    "witten_hodge_decomposition_check",
    "witten_identity_suite",
    "witten_operators",
]
