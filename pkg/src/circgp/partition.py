"""Monotone wrap-count representation of the input space.

A partition is an ordered set of wrap locations inside the observed input
range plus an integer offset ``k_min``; the induced wrap count at x is
``k_min + #{j: w_j <= x}``, non-decreasing in x.  The Metropolis-Hastings
sweep proposes shift / grow / shrink moves on the locations.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .backend import kernels

TAU = math.tau


@dataclass(frozen=True, eq=False)
class WrapPartition:
    """Ordered wrap locations and the wrap count left of the first one.

    Immutable snapshot; safe to retain in traces.
    """

    w: np.ndarray
    k_min: int
    x_min: float
    x_max: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        if w.size and not np.all(np.diff(w) > 0):
            raise ValueError("wrap locations must be strictly increasing")
        if w.size and (w[0] <= self.x_min or w[-1] >= self.x_max):
            raise ValueError("wrap locations must lie strictly inside (x_min, x_max)")

    @property
    def m(self):
        return int(self.w.size)


def wrap_counts(x, part):
    """Wrap count(s) at x: k_min plus the number of locations at or below x."""
    scalar = np.isscalar(x)
    counts = kernels.eval_k_batch(np.atleast_1d(np.asarray(x, dtype=np.float64)),
                                  part.w, part.k_min)
    return int(counts[0]) if scalar else counts


def _accept(log_ratio, rng):
    if log_ratio >= 0.0:
        return True
    return rng.random() < math.exp(log_ratio)


def mh_sweep(part, x, loglik, rng):
    """One Metropolis-Hastings sweep over the partition: shifts, a grow, a shrink.

    Parameters
    ----------
    part : current WrapPartition.
    x : training inputs (same scale as the partition bounds).
    loglik : callable mapping an induced wrap-count vector to a log
        likelihood; the responses and latent values it closes over are held
        fixed during the sweep.
    rng : numpy Generator.

    Returns
    -------
    (new WrapPartition, induced counts, move flags) where the flags record
    per-move acceptances: {"shift": [bool,...], "grow": bool, "shrink": bool
    or None when no shrink could be proposed}.

    Shifts run in ascending index order, each conditioned on the partially
    updated partition.  Grow draws uniformly over (x_min, x_max) and is
    accepted with the likelihood ratio times (x_max-x_min)/(m+1); shrink
    removes a uniformly chosen location with ratio times m/(x_max-x_min).
    A shrink is skipped (not counted as rejected) when no locations exist.
    """
    w = part.w.copy()
    lo, hi = part.x_min, part.x_max
    width = hi - lo
    k_cur = kernels.eval_k_batch(x, w, part.k_min)
    ll_cur = float(loglik(k_cur))
    flags = {"shift": [], "grow": False, "shrink": None}

    for i in range(w.size):
        left = w[i - 1] if i > 0 else lo
        right = w[i + 1] if i < w.size - 1 else hi
        w_star = rng.uniform(left, right)
        w_prop = w.copy()
        w_prop[i] = w_star
        k_prop = kernels.eval_k_batch(x, w_prop, part.k_min)
        ll_prop = float(loglik(k_prop))
        ok = _accept(ll_prop - ll_cur, rng)
        flags["shift"].append(ok)
        if ok:
            w, k_cur, ll_cur = w_prop, k_prop, ll_prop

    # grow
    m_pre = w.size
    w_star = rng.uniform(lo, hi)
    while np.any(w == w_star):  # measure-zero tie with an existing location
        w_star = rng.uniform(lo, hi)
    w_prop = np.sort(np.append(w, w_star))
    k_prop = kernels.eval_k_batch(x, w_prop, part.k_min)
    ll_prop = float(loglik(k_prop))
    ok = _accept(ll_prop - ll_cur + math.log(width) - math.log(m_pre + 1), rng)
    flags["grow"] = ok
    if ok:
        w, k_cur, ll_cur = w_prop, k_prop, ll_prop

    # shrink
    m = w.size
    if m > 0:
        i = int(rng.integers(m))
        w_prop = np.delete(w, i)
        k_prop = kernels.eval_k_batch(x, w_prop, part.k_min)
        ll_prop = float(loglik(k_prop))
        ok = _accept(ll_prop - ll_cur + math.log(m) - math.log(width), rng)
        flags["shrink"] = ok
        if ok:
            w, k_cur, ll_cur = w_prop, k_prop, ll_prop

    return replace(part, w=w), k_cur, flags


def predict_wrap_counts(xnew, parts):
    """Monte Carlo mean and variance of the wrap count at new inputs.

    ``parts`` is a sequence of posterior partition samples; the variance is
    the population variance across samples.
    """
    if len(parts) == 0:
        raise ValueError("at least one posterior partition sample is required")
    xnew = np.atleast_1d(np.asarray(xnew, dtype=np.float64))
    counts = np.stack(
        [kernels.eval_k_batch(xnew, p.w, p.k_min) for p in parts]
    ).astype(np.float64)
    mean = counts.mean(axis=0)
    var = ((counts - mean) ** 2).mean(axis=0)
    return mean, var


def reanchor_kmin(part, z):
    """Re-anchor k_min from the current latent minimum.

    Sets k_min to the floor count of full circles below the smallest latent
    value, so the induced counts track where the latent vector actually
    settled; residuals change only by whole circles.
    """
    new_kmin = int(math.floor(float(np.min(z)) / TAU))
    return replace(part, k_min=new_kmin)
