"""Observation log-likelihoods: Student-t for wrapped residuals and the
normal likelihood tying per-test slopes to a latent log-slope field.
"""

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels

TAU = math.tau
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TLikParams:
    """Student-t observation parameters: variance inflation sigma2, dof nu >= 3."""

    sigma2: float
    nu: float

    def __post_init__(self):
        if not (self.sigma2 > 0.0):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not (self.nu >= 3.0):
            raise ValueError(f"nu must be >= 3, got {self.nu}")


def student_t_loglik(y, z, k, params):
    """Log-likelihood of responses given latents and wrap counts.

    Residuals are r_i = y_i - (z_i - tau*k_i); each contributes a central
    scaled Student-t log density with scale sqrt(sigma2) and nu degrees of
    freedom, evaluated entirely in log space.
    """
    resid = np.asarray(y, dtype=np.float64) - (
        np.asarray(z, dtype=np.float64) - TAU * np.asarray(k, dtype=np.float64)
    )
    return kernels.t_loglik_sum(resid, params.sigma2, params.nu)


def slope_field_loglik(delta, slopes, sigma_beta):
    """Sum of normal log densities of slopes around exp(delta).

    Includes the -m*log(sigma_beta) normalization (constant in delta) so the
    value is a proper log density.
    """
    delta = np.asarray(delta, dtype=np.float64)
    slopes = np.asarray(slopes, dtype=np.float64)
    if delta.shape != slopes.shape:
        raise ValueError("delta and slopes must have equal length")
    std = (slopes - np.exp(delta)) / sigma_beta
    m = delta.size
    return float(
        -0.5 * m * LOG_2PI - 0.5 * np.sum(std * std) - m * math.log(sigma_beta)
    )
