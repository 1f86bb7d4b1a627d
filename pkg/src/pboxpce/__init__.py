"""Propagation of probability-boxes through computational models via
two-level sparse polynomial chaos surrogates."""

from .cdfs import (
    TRUNC_HI,
    TRUNC_LO,
    AverageCDF,
    CDF,
    EnvelopeCDF,
    ParametricCDF,
    SteppedCDF,
    cdf_from_dict,
    gumbel_params_from_mean_cov,
    lognormal_params_from_mean_cov,
)
from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    ConfigError,
    PboxError,
)
from .metrics import PboxComparison, ks_distance, ks_statistic, pbox_area
from .models import ModelHandle, model_from_spec
from .optimize import (
    OptimizerConfig,
    batch_minmax,
    corner_bounds,
    interval_minmax,
    monotone_corner_bounds,
    probe_directions,
)
from .orthopoly import BasisSpec, basis_eval, hyperbolic_index_set
from .pbox import (
    ExpertInterval,
    Interval,
    PBox,
    condense_average,
    condense_uniform,
    discretize_outer,
    envelope_aggregate,
    mixture_aggregate,
    parametric_envelope,
    pbox_from_dict,
)
from .pce import (
    InputTransform,
    PceModel,
    err_gen_estimate,
    fit_least_squares,
    fit_sparse_lar,
    lhs_sample,
    loo_error,
    mc_sample,
)
from .propagation import (
    PropagationConfig,
    ResponsePBox,
    convert_sample_propagate,
    iso_transform,
    reference_propagate,
    resolve_condensation,
    slice_propagate,
    two_level_propagate,
)

__version__ = "0.1.0"

__all__ = [
    "AverageCDF",
    "BasisSpec",
    "CDF",
    "ConfigError",
    "EnvelopeCDF",
    "ExperimentConfig",
    "ExpertInterval",
    "InputTransform",
    "Interval",
    "ModelHandle",
    "OptimizerConfig",
    "PBox",
    "ParametricCDF",
    "PboxComparison",
    "PboxError",
    "PceModel",
    "PropagationConfig",
    "ResponsePBox",
    "SteppedCDF",
    "TRUNC_HI",
    "TRUNC_LO",
    "basis_eval",
    "batch_minmax",
    "cdf_from_dict",
    "condense_average",
    "condense_uniform",
    "convert_sample_propagate",
    "corner_bounds",
    "discretize_outer",
    "envelope_aggregate",
    "err_gen_estimate",
    "fit_least_squares",
    "fit_sparse_lar",
    "gumbel_params_from_mean_cov",
    "hyperbolic_index_set",
    "interval_minmax",
    "iso_transform",
    "ks_distance",
    "ks_statistic",
    "lhs_sample",
    "load_config",
    "lognormal_params_from_mean_cov",
    "loo_error",
    "mc_sample",
    "mixture_aggregate",
    "model_from_spec",
    "monotone_corner_bounds",
    "parametric_envelope",
    "parse_config",
    "pbox_area",
    "pbox_from_dict",
    "probe_directions",
    "reference_propagate",
    "resolve_condensation",
    "slice_propagate",
    "two_level_propagate",
]
