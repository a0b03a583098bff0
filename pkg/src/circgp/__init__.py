"""Bayesian wrapped Gaussian process regression for angular responses.

Fits a latent GP plus a monotone wrap-count partition by MCMC (elliptical
slice sampling for the latents, Metropolis-Hastings over wrap locations),
predicts out of sample with uncertainty, and ships baselines, synthetic
benchmarks, scoring, and a hierarchical multi-test extension for distance
inference.
"""

from .backend import active_backend
from .baselines import (
    CoupledConfig,
    fit_coupled,
    fit_ordinary,
    predict_coupled,
    predict_ordinary,
)
from .exceptions import (
    CholeskyFailure,
    DataFormatError,
    DegenerateGroup,
    NonFiniteLoglik,
)
from .gp import CovMatrix, KernelParams, build_cov, kernel_value, kriging, mvn_draw
from .hier import HierConfig, HierTrace, hier_fit, predict_delta, slope_to_distance
from .hyper import MeanParams, PriorConfig, slope_prior_mean
from .likelihoods import TLikParams, slope_field_loglik, student_t_loglik
from .metrics import ScoreReport, circ_residual, crps, rmse_circular, score_predictions
from .model import (
    Dataset,
    FitConfig,
    ModelState,
    PredictionResult,
    Trace,
    fit,
    initialize,
    predict,
)
from .partition import WrapPartition, predict_wrap_counts, reanchor_kmin, wrap_counts
from .simulate import (
    RfidData,
    SimInstance,
    gen_lhs,
    gen_log,
    gen_log_gapped,
    gen_rfid_like,
    gen_wgp_instance,
)

__version__ = "0.1.0"

__all__ = [
    "active_backend",
    "build_cov",
    "circ_residual",
    "CholeskyFailure",
    "CoupledConfig",
    "CovMatrix",
    "crps",
    "DataFormatError",
    "Dataset",
    "DegenerateGroup",
    "fit",
    "fit_coupled",
    "fit_ordinary",
    "FitConfig",
    "gen_lhs",
    "gen_log",
    "gen_log_gapped",
    "gen_rfid_like",
    "gen_wgp_instance",
    "hier_fit",
    "HierConfig",
    "HierTrace",
    "initialize",
    "kernel_value",
    "KernelParams",
    "kriging",
    "MeanParams",
    "ModelState",
    "mvn_draw",
    "NonFiniteLoglik",
    "predict",
    "predict_coupled",
    "predict_delta",
    "predict_ordinary",
    "predict_wrap_counts",
    "PredictionResult",
    "PriorConfig",
    "reanchor_kmin",
    "RfidData",
    "rmse_circular",
    "score_predictions",
    "ScoreReport",
    "SimInstance",
    "slope_field_loglik",
    "slope_prior_mean",
    "slope_to_distance",
    "student_t_loglik",
    "TLikParams",
    "Trace",
    "wrap_counts",
    "WrapPartition",
]
