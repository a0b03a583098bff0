"""Gaussian process linear algebra: squared-exponential kernel, covariance
factorization, multivariate normal draws and densities, and pointwise
kriging conditionals.

Convention: ``build_cov`` returns the full covariance tau2 * corr + jitter*I.
Samplers that update tau2 separately build the correlation-level matrix by
passing ``KernelParams(theta, 1.0)`` and rescale analytically, which avoids
refactorizing when only tau2 changes.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .backend import kernels
from .exceptions import CholeskyFailure

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel hyperparameters.

    theta -- lengthscale (squared input units); controls correlation decay
    tau2  -- marginal variance scale
    """

    theta: float
    tau2: float

    def __post_init__(self):
        if not (self.theta > 0.0):
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not (self.tau2 > 0.0):
            raise ValueError(f"tau2 must be positive, got {self.tau2}")


class CovMatrix:
    """Symmetric positive-definite matrix with a cached lower Cholesky factor.

    Immutable once constructed; safe to share across threads.
    """

    __slots__ = ("matrix", "chol", "jitter")

    def __init__(self, matrix, chol, jitter):
        self.matrix = matrix
        self.chol = chol
        self.jitter = jitter

    @classmethod
    def from_matrix(cls, matrix, jitter=0.0):
        """Factor an explicit covariance matrix (jitter already applied).

        An exactly-zero matrix is accepted as the degenerate no-variance
        case (its factor is the zero matrix).
        """
        matrix = np.asarray(matrix, dtype=np.float64)
        if not matrix.any():
            return cls(matrix, np.zeros_like(matrix), jitter)
        try:
            chol = np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError as err:
            raise CholeskyFailure(f"covariance not positive definite: {err}") from err
        return cls(matrix, chol, jitter)

    @property
    def n(self):
        return self.matrix.shape[0]

    def scaled(self, factor):
        """Covariance multiplied by a positive scalar, reusing the factorization."""
        return CovMatrix(
            factor * self.matrix, math.sqrt(factor) * self.chol, factor * self.jitter
        )

    def half_solve(self, b):
        """L^{-1} b for the cached lower factor L."""
        return solve_triangular(self.chol, b, lower=True, check_finite=False)

    def solve(self, b):
        """matrix^{-1} b via the cached factorization."""
        half = self.half_solve(b)
        return solve_triangular(self.chol.T, half, lower=False, check_finite=False)

    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))


def kernel_value(x_i, x_j, params):
    """Squared-exponential correlation exp(-(x_i-x_j)^2 / theta), in (0, 1]."""
    d = x_i - x_j
    return math.exp(-(d * d) / params.theta)


def build_cov(x, params, jitter=None):
    """Dense covariance tau2*exp(-(xi-xj)^2/theta) + jitter*I, factorized.

    Parameters
    ----------
    x : 1-d array of inputs (replicates allowed).
    params : KernelParams.
    jitter : float or None.  None applies the default ladder starting at
        1e-8*tau2 and escalating tenfold up to 1e-4*tau2 before raising
        CholeskyFailure.  An explicit value (including 0) is used as-is
        with no escalation.

    Returns
    -------
    CovMatrix with the jitter actually used.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("x must be nonempty")
    if jitter is None:
        ladder = [params.tau2 * 10.0**e for e in range(-8, -3)]
    else:
        if jitter < 0:
            raise ValueError("jitter must be nonnegative")
        ladder = [float(jitter)]
    corr = kernels.sqexp_corr(x, params.theta, 0.0)
    base = params.tau2 * corr
    for j in ladder:
        mat = base if j == 0.0 else base + j * np.eye(x.size)
        try:
            chol = np.linalg.cholesky(mat)
        except np.linalg.LinAlgError:
            continue
        return CovMatrix(mat, chol, j)
    raise CholeskyFailure(
        f"covariance of size {x.size} indefinite even at jitter {ladder[-1]:g}; "
        "duplicate inputs may need a larger explicit jitter"
    )


def mvn_draw(mean, cov, rng):
    """One draw mean + L u with u standard normal; deterministic under a seed."""
    mean = np.asarray(mean, dtype=np.float64)
    u = rng.standard_normal(mean.size)
    return mean + cov.chol @ u


def mvn_loglik(x, mean, cov):
    """Multivariate normal log density of x under N(mean, cov)."""
    resid = np.asarray(x, dtype=np.float64) - mean
    half = cov.half_solve(resid)
    quad = float(half @ half)
    return -0.5 * (cov.n * LOG_2PI + cov.logdet() + quad)


def kriging(x, z, xnew, alpha, beta, params, cov=None, jitter=None):
    """Pointwise Gaussian conditional of the latent values at new inputs.

    The prior mean is the linear trend alpha + beta*x.  Returns per-point
    conditional means and variances (variances clamped at zero); the joint
    predictive covariance is deliberately not formed.

    ``cov`` may carry a precomputed ``build_cov(x, params, jitter)`` result.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    xnew = np.asarray(xnew, dtype=np.float64)
    if cov is None:
        cov = build_cov(x, params, jitter=jitter)
    cross = params.tau2 * kernels.sqexp_cross(xnew, x, params.theta)
    resid = z - alpha - beta * x
    half_resid = cov.half_solve(resid)
    half_cross = cov.half_solve(cross.T)  # (n, n')
    mean = alpha + beta * xnew + half_cross.T @ half_resid
    var = params.tau2 - np.einsum("ij,ij->j", half_cross, half_cross)
    np.clip(var, 0.0, None, out=var)
    return mean, var
