"""Moment tensors of vector-valued random variables at desk scale."""

__version__ = "0.1.0"

from .gaussian_calculus import CovOp, Grid, bm_covariance, bm_fourth, indicator_moment, rw_second, wick_moment
from .tensor_core import MomentTensor, MultilinearForm, NormedSpace, NormKind
from .tensor_norms import NormResult, grothendieck_check, injective_norm, norm_oracle, projective_norm

__all__ = [
    "__version__",
    "CovOp",
    "Grid",
    "MomentTensor",
    "MultilinearForm",
    "NormKind",
    "NormResult",
    "NormedSpace",
    "bm_covariance",
    "bm_fourth",
    "grothendieck_check",
    "indicator_moment",
    "injective_norm",
    "norm_oracle",
    "projective_norm",
    "rw_second",
    "wick_moment",
]
