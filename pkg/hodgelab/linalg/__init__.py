"""Scalar arithmetic, matrices, subspaces and Gram forms for both backends."""

from .gram import (
    Eigen,
    GramForm,
    g_orthonormal_basis,
    gram_adjoint,
    hermitian_eigs,
    orthogonal_projector,
    psd_domination_check,
    self_adjoint_defect,
    zero_threshold,
)
from .matrices import (
    backend_of,
    conj,
    det,
    eye,
    exact_array,
    fro_norm,
    hconj,
    inverse,
    is_zero,
    matmul,
    scale,
    to_backend,
    to_float,
    zeros,
)
from .scalars import I, ONE, ZERO, Backend, GaussianRational, gr
from .subspace import DEFAULT_POLICY, RankKernelImage, RankPolicy, Subspace, rank_kernel_image, subspace_algebra

__all__ = [
    "Backend",
    "DEFAULT_POLICY",
    "Eigen",
    "GaussianRational",
    "GramForm",
    "I",
    "ONE",
    "RankKernelImage",
    "RankPolicy",
    "Subspace",
    "ZERO",
    "backend_of",
    "conj",
    "det",
    "exact_array",
    "eye",
    "fro_norm",
    "g_orthonormal_basis",
    "gr",
    "gram_adjoint",
    "hconj",
    "hermitian_eigs",
    "inverse",
    "is_zero",
    "matmul",
    "orthogonal_projector",
    "psd_domination_check",
    "rank_kernel_image",
    "scale",
    "self_adjoint_defect",
    "subspace_algebra",
    "to_backend",
    "to_float",
    "zero_threshold",
    "zeros",
]
