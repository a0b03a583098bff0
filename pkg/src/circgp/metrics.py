"""Scores for angular predictions: circular residuals, circular RMSE, and
quantile-decomposition CRPS over posterior predictive samples.

Note on naming: ``rmse_circular`` is the mean of squared circular residuals
(no outer square root), reported under that name for comparability;
``rmse_circular_sqrt`` is its square root for interpretability.
"""

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .util import TAU, wrap_angle


@dataclass(eq=False)
class ScoreReport:
    """Evaluation summary for one prediction set."""

    n_test: int
    rmse_circular: float
    rmse_circular_sqrt: float
    crps: float
    residuals: np.ndarray


def circ_residual(a, b):
    """Angular distance between a and b in [0, pi]: the smallest |a + tau*l - b|
    over l in {-1, 0, 1}.  Symmetric; expects angles in [0, tau)."""
    scalar = np.isscalar(a) and np.isscalar(b)
    out = kernels.circ_resid_batch(
        np.atleast_1d(np.asarray(a, dtype=np.float64)),
        np.atleast_1d(np.asarray(b, dtype=np.float64)),
    )
    return float(out[0]) if scalar else out


def rmse_circular(y_true, mean_wrapped):
    """Mean squared circular residual between observations and predictions."""
    r = circ_residual(np.asarray(y_true, dtype=np.float64),
                      np.asarray(mean_wrapped, dtype=np.float64))
    return float(np.mean(r * r))


def anchor_samples(y_true, samples):
    """Wrap predictive samples into [0, tau) and shift each by the whole
    circle that brings it closest to its observation."""
    y = np.asarray(y_true, dtype=np.float64)
    s = wrap_angle(np.asarray(samples, dtype=np.float64))
    d = s - y[:, None]
    choices = np.stack([np.abs(d - TAU), np.abs(d), np.abs(d + TAU)])
    shift = choices.argmin(axis=0) - 1
    return s + TAU * shift


def crps(y_true, samples):
    """Quantile-decomposition CRPS averaged over test points.

    ``samples`` has shape (n_test, n_draws) with at least two draws per
    point; draws are anchored to the observation, sorted, then paired with
    the centred quantile levels.
    """
    y = np.asarray(y_true, dtype=np.float64)
    s = np.asarray(samples, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != y.size:
        raise ValueError("samples must have shape (n_test, n_draws)")
    if s.shape[1] < 2:
        raise ValueError("at least two draws per test point are required")
    shifted = np.sort(anchor_samples(y, s), axis=1)
    vals = [kernels.crps_point(float(y[i]), shifted[i]) for i in range(y.size)]
    return float(np.mean(vals))


def score_predictions(y_true, result):
    """ScoreReport for a PredictionResult against observed angles."""
    y = np.asarray(y_true, dtype=np.float64)
    resid = circ_residual(y, result.mean_wrapped)
    mse = float(np.mean(resid * resid))
    return ScoreReport(
        n_test=y.size,
        rmse_circular=mse,
        rmse_circular_sqrt=float(np.sqrt(mse)),
        crps=crps(y, result.y_samples),
        residuals=resid,
    )
