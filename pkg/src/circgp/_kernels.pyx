# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled numeric kernels; mirrors circgp._kernels_py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, lgamma, log, log1p, M_PI

cnp.import_array()

cdef double TAU = 2.0 * M_PI


def sqexp_corr(object x_in, double theta, double jitter):
    """Squared-exponential correlation matrix exp(-(xi-xj)^2/theta) + jitter*I."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, n), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double d, v
    for i in range(n):
        out[i, i] = 1.0 + jitter
        for j in range(i + 1, n):
            d = x[i] - x[j]
            v = exp(-(d * d) / theta)
            out[i, j] = v
            out[j, i] = v
    return out


def sqexp_cross(object xa_in, object xb_in, double theta):
    """Cross-correlation matrix between two input sets, shape (len(xa), len(xb))."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.ascontiguousarray(xa_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xb = np.ascontiguousarray(xb_in, dtype=np.float64)
    cdef Py_ssize_t na = xa.shape[0], nb = xb.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((na, nb), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double d
    for i in range(na):
        for j in range(nb):
            d = xa[i] - xb[j]
            out[i, j] = exp(-(d * d) / theta)
    return out


def t_loglik_sum(object resid_in, double sigma2, double nu):
    """Sum of scaled Student-t log densities of the residuals."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] resid = np.ascontiguousarray(resid_in, dtype=np.float64)
    cdef Py_ssize_t n = resid.shape[0]
    cdef double const = (
        lgamma(0.5 * (nu + 1.0)) - lgamma(0.5 * nu) - 0.5 * log(M_PI * nu * sigma2)
    )
    cdef double quad = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        quad += log1p((resid[i] * resid[i]) / (nu * sigma2))
    return n * const - 0.5 * (nu + 1.0) * quad


def eval_k_batch(object x_in, object w_in, long kmin):
    """Wrap counts kmin + #{j: w_j <= x_i} for each x_i; w must be sorted."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], m = w.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef long c
    for i in range(n):
        c = 0
        for j in range(m):
            if w[j] <= x[i]:
                c += 1
            else:
                break
        out[i] = kmin + c
    return out


def circ_resid_batch(object a_in, object b_in):
    """Circular residual min over shifts {-tau, 0, +tau} of |a + shift - b|."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double d, best, c
    for i in range(n):
        d = a[i] - b[i]
        best = fabs(d)
        c = fabs(d - TAU)
        if c < best:
            best = c
        c = fabs(d + TAU)
        if c < best:
            best = c
        out[i] = best
    return out


def crps_point(double y, object samples_in):
    """Quantile-decomposition CRPS contribution for one observation."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.ascontiguousarray(samples_in, dtype=np.float64)
    cdef Py_ssize_t t = s.shape[0]
    cdef double acc = 0.0, level, ind
    cdef Py_ssize_t i
    for i in range(t):
        level = (2.0 * (i + 1) - 1.0) / (2.0 * t)
        ind = 1.0 if y < s[i] else 0.0
        acc += (ind - level) * (s[i] - y)
    return 2.0 / t * acc


def coupled_sweep(object v_in, object mu_in, object prec_in, object y_in,
                  object kk_in, long window, object uniforms_in):
    """One Gibbs sweep over per-observation wrap counts for the coupled model.

    ``v`` and ``kk`` are updated in place; see the pure twin for details.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = v_in
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mu = np.ascontiguousarray(mu_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] prec = np.ascontiguousarray(prec_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] kk = kk_in
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.ascontiguousarray(uniforms_in, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t nw = 2 * window + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] logw = np.empty(nw, dtype=np.float64)
    cdef Py_ssize_t i, j, pick
    cdef double p_ii, s2, dot, cond_mean, cand, mx, total, target, acc
    for i in range(n):
        p_ii = prec[i, i]
        s2 = 1.0 / p_ii
        dot = 0.0
        for j in range(n):
            dot += prec[i, j] * (v[j] - mu[j])
        cond_mean = mu[i] - s2 * (dot - p_ii * (v[i] - mu[i]))
        mx = -1e308
        for j in range(nw):
            cand = y[i] + TAU * (kk[i] - window + j)
            logw[j] = -0.5 * (cand - cond_mean) * (cand - cond_mean) / s2
            if logw[j] > mx:
                mx = logw[j]
        total = 0.0
        for j in range(nw):
            logw[j] = exp(logw[j] - mx)
            total += logw[j]
        target = u[i] * total
        acc = 0.0
        pick = nw - 1
        for j in range(nw):
            acc += logw[j]
            if acc > target:
                pick = j
                break
        kk[i] = kk[i] - window + pick
        v[i] = y[i] + TAU * kk[i]
