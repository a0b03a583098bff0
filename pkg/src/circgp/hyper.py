"""Conditional updates for the trend, scale, lengthscale, and observation
parameters, plus the informative slope-prior preprocessing.

The trend and scale draws are conjugate Gibbs steps; lengthscale, noise
scale, and degrees of freedom use log-random-walk Metropolis-Hastings with
fixed step sizes (no adaptation, so the chain keeps a fixed kernel).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .backend import kernels
from .exceptions import DegenerateGroup
from .gp import KernelParams, build_cov

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MeanParams:
    """Linear trend of the latent process: intercept alpha, slope beta."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class PriorConfig:
    """Hyperparameter priors and the slope-preprocessing group size.

    mu0        -- slope prior mean (filled in from slope_prior_mean)
    sigma0_sq  -- prior variance of the intercept and (by default) slope
    beta_var   -- optional slope-specific prior variance (hierarchical fits
                  tighten this); None means sigma0_sq
    theta_*    -- Gamma(shape, rate) prior on the lengthscale
    sigma2_*   -- Gamma(shape, rate) prior on the observation scale
    nu_rate    -- Exponential rate of the dof prior, truncated at nu_min
    ell        -- slope-preprocessing group size; None picks max(5, ceil(n/10))
    """

    mu0: float = 0.0
    sigma0_sq: float = 10.0
    beta_var: float = None
    theta_shape: float = 2.5
    theta_rate: float = 1.5
    sigma2_shape: float = 0.5
    sigma2_rate: float = 0.5
    nu_rate: float = 1.0 / 30.0
    nu_min: float = 3.0
    ell: int = None

    @property
    def slope_var(self):
        return self.sigma0_sq if self.beta_var is None else self.beta_var


def default_ell(n):
    """Default slope-preprocessing group size."""
    return max(5, math.ceil(n / 10))


def slope_prior_mean(x, y, ell):
    """Average of zero-clamped local least-squares slopes over contiguous groups.

    x must be sorted ascending.  A group with zero input variance is skipped
    with a DegenerateGroup warning.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    if not (2 <= ell <= n):
        raise ValueError(f"group size must satisfy 2 <= ell <= n, got ell={ell}, n={n}")
    slopes = []
    for j in range(math.ceil(n / ell)):
        sl = slice(j * ell, min((j + 1) * ell, n))
        xs = x[sl]
        ys = y[sl]
        xc = xs - xs.mean()
        denom = float(xc @ xc)
        if denom == 0.0:
            warnings.warn(
                f"slope group {j} has zero input variance; skipped", DegenerateGroup
            )
            continue
        slopes.append(float(xc @ (ys - ys.mean())) / denom)
    if not slopes:
        raise ValueError("all slope groups were degenerate")
    return float(np.mean(np.maximum(0.0, slopes)))


def gibbs_mean(z, x, tau2, theta, prior, rng, cov=None):
    """Conjugate bivariate normal draw of (alpha, beta) given the latents.

    The prior is N((0, mu0), diag(sigma0_sq, slope_var)); the likelihood is
    the latent GP with covariance tau2 * corr(theta).  ``cov`` may carry the
    correlation-level factorization build_cov(x, (theta, 1)).
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if cov is None:
        cov = build_cov(x, KernelParams(theta, 1.0))
    design = np.column_stack([np.ones_like(x), x])
    sinv_d = cov.solve(design)
    a_mat = (design.T @ sinv_d) / tau2 + np.diag(
        [1.0 / prior.sigma0_sq, 1.0 / prior.slope_var]
    )
    b_vec = (sinv_d.T @ z) / tau2 + np.array(
        [0.0, prior.mu0 / prior.slope_var]
    )
    try:
        la = np.linalg.cholesky(a_mat)
    except np.linalg.LinAlgError as err:  # pragma: no cover - 2x2, well-conditioned
        from .exceptions import CholeskyFailure

        raise CholeskyFailure(f"trend posterior precision not PD: {err}") from err
    mean = solve_triangular(
        la.T, solve_triangular(la, b_vec, lower=True), lower=False
    )
    draw = mean + solve_triangular(la.T, rng.standard_normal(2), lower=False)
    return MeanParams(float(draw[0]), float(draw[1]))


def gibbs_tau2(z, x, alpha, beta, theta, rng, cov=None):
    """Inverse-gamma draw of the scale given latents and trend.

    Shape (1+n)/2 and rate (1 + e' corr^{-1} e)/2 with e the de-trended
    latents.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if cov is None:
        cov = build_cov(x, KernelParams(theta, 1.0))
    e = z - alpha - beta * x
    half = cov.half_solve(e)
    quad = float(half @ half)
    a_n = 0.5 * (1.0 + x.size)
    b_n = 0.5 * (1.0 + quad)
    return b_n / rng.gamma(a_n, 1.0)


def _gp_logpost_theta(z, mean, tau2, cov, theta, prior):
    resid = z - mean
    half = cov.half_solve(resid)
    quad = float(half @ half)
    ll = -0.5 * (cov.n * (LOG_2PI + math.log(tau2)) + cov.logdet() + quad / tau2)
    lp = (prior.theta_shape - 1.0) * math.log(theta) - prior.theta_rate * theta
    return ll + lp


def mh_lengthscale(theta, z, x, alpha, beta, tau2, prior, rng, cov=None, step=0.3):
    """Log-random-walk update of the lengthscale.

    Returns (theta, correlation CovMatrix for the returned theta, accepted).
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if cov is None:
        cov = build_cov(x, KernelParams(theta, 1.0))
    theta_star = theta * math.exp(step * rng.standard_normal())
    cov_star = build_cov(x, KernelParams(theta_star, 1.0))
    mean = alpha + beta * x
    log_ratio = (
        _gp_logpost_theta(z, mean, tau2, cov_star, theta_star, prior)
        - _gp_logpost_theta(z, mean, tau2, cov, theta, prior)
        + math.log(theta_star)
        - math.log(theta)
    )
    if log_ratio >= 0.0 or rng.random() < math.exp(log_ratio):
        return theta_star, cov_star, True
    return theta, cov, False


def mh_sigma2(sigma2, resid, nu, prior, rng, step=0.3):
    """Log-random-walk update of the observation scale under the t likelihood."""
    resid = np.asarray(resid, dtype=np.float64)
    s_star = sigma2 * math.exp(step * rng.standard_normal())
    log_ratio = (
        kernels.t_loglik_sum(resid, s_star, nu)
        - kernels.t_loglik_sum(resid, sigma2, nu)
        + prior.sigma2_shape * (math.log(s_star) - math.log(sigma2))
        - prior.sigma2_rate * (s_star - sigma2)
    )
    if log_ratio >= 0.0 or rng.random() < math.exp(log_ratio):
        return s_star, True
    return sigma2, False


def mh_nu(nu, resid, sigma2, prior, rng, step=0.5):
    """Log-random-walk update of the t degrees of freedom.

    Proposals below the support floor are rejected outright.
    """
    resid = np.asarray(resid, dtype=np.float64)
    nu_star = nu * math.exp(step * rng.standard_normal())
    if nu_star < prior.nu_min:
        return nu, False
    log_ratio = (
        kernels.t_loglik_sum(resid, sigma2, nu_star)
        - kernels.t_loglik_sum(resid, sigma2, nu)
        - prior.nu_rate * (nu_star - nu)
        + math.log(nu_star)
        - math.log(nu)
    )
    if log_ratio >= 0.0 or rng.random() < math.exp(log_ratio):
        return nu_star, True
    return nu, False
