"""Elliptical slice sampling for a latent vector with a Gaussian prior and
an arbitrary log-likelihood.  Rejection-free: the angle bracket shrinks
toward zero, where the proposal recovers the current state, so every call
terminates.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NonFiniteLoglik
from .gp import CovMatrix, mvn_draw

TAU = math.tau


@dataclass
class EssTarget:
    """Prior mean/covariance and log-likelihood for one slice-sampling update."""

    mean: np.ndarray
    cov: CovMatrix
    loglik: object  # callable: candidate array -> float


def ess_step(current, target, rng):
    """One elliptical slice update.

    Draws an auxiliary prior deviate, a log threshold below the current
    log-likelihood, and an angle with bracket [angle - tau, angle]; proposes
    de-meaned rotations mean + (current-mean)*cos(g) + deviate*sin(g),
    shrinking the bracket toward zero on each rejection.

    Returns (new state, number of shrinks).  Raises NonFiniteLoglik when the
    current state's log-likelihood is not finite.
    """
    current = np.asarray(current, dtype=np.float64)
    ll0 = float(target.loglik(current))
    if not math.isfinite(ll0):
        raise NonFiniteLoglik(f"log-likelihood at current state is {ll0}")
    deviate = mvn_draw(np.zeros(current.size), target.cov, rng)
    # log of a Uniform(0,1] via log1p(-u) with u in [0,1): never -inf
    thresh = ll0 + math.log1p(-rng.random())
    angle = rng.uniform(0.0, TAU)
    lo, hi = angle - TAU, angle
    centered = current - target.mean
    shrinks = 0
    while True:
        cand = target.mean + centered * math.cos(angle) + deviate * math.sin(angle)
        if float(target.loglik(cand)) > thresh:
            return cand, shrinks
        if angle < 0.0:
            lo = angle
        else:
            hi = angle
        angle = rng.uniform(lo, hi)
        shrinks += 1
