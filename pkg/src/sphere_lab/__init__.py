"""Spectral radii of products of spherical-ensemble random matrices.

Exact-in-law sampling through independent Gamma variates, the fixed-m and
divergent-m limit laws, a direct matrix-simulation oracle, and KS-based
experiments tying them together.
"""

from .limit_laws import (
    McReferenceLaw,
    NormalLimitParams,
    TruncatedProductLaw,
    build_mc_reference,
    finite_n_cdf_m1,
    limit_cdf_m1,
    limit_sf_m1,
    normal_params,
    theorem2_normalize,
)
from .sampler import (
    EnsembleSpec,
    LogRadiusSample,
    SampleBatch,
    default_i_max,
    sample_batch,
    sample_limit_variable,
    sample_log_radius,
    truncation_bound,
)
from .stats import Ecdf, build_ecdf, ks_one_sample, ks_two_sample
from .streams import RngStreamSpec

__version__ = "0.1.0"

__all__ = [
    "Ecdf",
    "EnsembleSpec",
    "LogRadiusSample",
    "McReferenceLaw",
    "NormalLimitParams",
    "RngStreamSpec",
    "SampleBatch",
    "TruncatedProductLaw",
    "build_ecdf",
    "build_mc_reference",
    "default_i_max",
    "finite_n_cdf_m1",
    "ks_one_sample",
    "ks_two_sample",
    "limit_cdf_m1",
    "limit_sf_m1",
    "normal_params",
    "sample_batch",
    "sample_limit_variable",
    "sample_log_radius",
    "theorem2_normalize",
    "truncation_bound",
]
