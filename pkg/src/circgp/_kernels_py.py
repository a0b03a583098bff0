"""Pure numpy implementations of the hot numeric kernels.

Mirrors the signatures of the compiled module ``circgp._kernels``; the
active implementation is chosen in ``circgp.backend``.
"""

import math

import numpy as np

TAU = math.tau  # 2*pi


def sqexp_corr(x, theta, jitter):
    """Squared-exponential correlation matrix exp(-(xi-xj)^2/theta) + jitter*I."""
    x = np.asarray(x, dtype=np.float64)
    d = x[:, None] - x[None, :]
    out = np.exp(-(d * d) / theta)
    if jitter != 0.0:
        out[np.diag_indices_from(out)] += jitter
    return out


def sqexp_cross(xa, xb, theta):
    """Cross-correlation matrix between two input sets, shape (len(xa), len(xb))."""
    xa = np.asarray(xa, dtype=np.float64)
    xb = np.asarray(xb, dtype=np.float64)
    d = xa[:, None] - xb[None, :]
    return np.exp(-(d * d) / theta)


def t_loglik_sum(resid, sigma2, nu):
    """Sum of scaled Student-t log densities of the residuals."""
    resid = np.asarray(resid, dtype=np.float64)
    n = resid.size
    const = (
        math.lgamma(0.5 * (nu + 1.0))
        - math.lgamma(0.5 * nu)
        - 0.5 * math.log(math.pi * nu * sigma2)
    )
    quad = np.log1p((resid * resid) / (nu * sigma2)).sum()
    return float(n * const - 0.5 * (nu + 1.0) * quad)


def eval_k_batch(x, w, kmin):
    """Wrap counts kmin + #{j: w_j <= x_i} for each x_i; w must be sorted."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    return kmin + np.searchsorted(w, x, side="right").astype(np.int64)


def circ_resid_batch(a, b):
    """Circular residual min over shifts {-tau, 0, +tau} of |a + shift - b|."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = a - b
    cand = np.abs(np.stack([d - TAU, d, d + TAU]))
    return cand.min(axis=0)


def crps_point(y, samples_sorted):
    """Quantile-decomposition CRPS contribution for one observation.

    ``samples_sorted`` are the anchored predictive draws in ascending
    order; returns (2/T) * sum_t (1(y < s_t) - (2t-1)/(2T)) * (s_t - y).
    """
    s = np.asarray(samples_sorted, dtype=np.float64)
    t = s.size
    levels = (2.0 * np.arange(1, t + 1) - 1.0) / (2.0 * t)
    ind = (y < s).astype(np.float64)
    return float(2.0 / t * np.sum((ind - levels) * (s - y)))


def coupled_sweep(v, mu, prec, y, kk, window, uniforms):
    """One Gibbs sweep over per-observation wrap counts for the coupled model.

    ``v`` (unwrapped values y + tau*k) and ``kk`` (wrap counts) are updated
    in place.  ``prec`` is the precision matrix of the joint Gaussian for v,
    ``window`` the half-width of the integer window centred at the current
    count, and ``uniforms`` one uniform draw per observation used for
    inverse-CDF sampling of the discrete conditional.
    """
    n = v.shape[0]
    for i in range(n):
        p_ii = prec[i, i]
        s2 = 1.0 / p_ii
        dot = float(prec[i] @ (v - mu))
        cond_mean = mu[i] - s2 * (dot - p_ii * (v[i] - mu[i]))
        ks = kk[i] + np.arange(-window, window + 1)
        cand = y[i] + TAU * ks
        logw = -0.5 * (cand - cond_mean) ** 2 / s2
        logw -= logw.max()
        wgt = np.exp(logw)
        cdf = np.cumsum(wgt)
        j = int(np.searchsorted(cdf, uniforms[i] * cdf[-1], side="right"))
        j = min(j, ks.size - 1)
        kk[i] = ks[j]
        v[i] = y[i] + TAU * kk[i]
