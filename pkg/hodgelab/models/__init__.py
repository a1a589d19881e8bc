"""Structure equations, exterior algebra and the double complexes built from them."""

from .complex import DoubleComplex, apply_d, build_double_complex, conjugation_matrix
from .foliated import FoliatedComplex, check_foliation_integrability, embedding, foliated_split
from .forms import ExteriorAlgebra, Form, Monomial, add, power, scale_form, wedge
from .structure import (
    BUILTIN_MODELS,
    StructureEquations,
    WittenTerm,
    builtin_model,
    load_structure_equations,
    parse_structure_equations,
    resolve_model,
)

__all__ = [
    "BUILTIN_MODELS",
    "DoubleComplex",
    "ExteriorAlgebra",
    "FoliatedComplex",
    "Form",
    "Monomial",
    "StructureEquations",
    "WittenTerm",
    "add",
    "apply_d",
    "build_double_complex",
    "builtin_model",
    "check_foliation_integrability",
    "conjugation_matrix",
    "embedding",
    "foliated_split",
    "load_structure_equations",
    "parse_structure_equations",
    "power",
    "resolve_model",
    "scale_form",
    "wedge",
]
