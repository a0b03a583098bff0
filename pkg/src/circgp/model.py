"""Full MCMC driver for the wrapped-GP model and out-of-sample prediction.

One iteration updates, in order: the wrap partition (shift/grow/shrink MH),
the latent vector (elliptical slice), the linear trend (Gibbs), the scale
(Gibbs), the lengthscale (MH), and the two observation parameters (MH).
Inputs are rescaled to the unit interval internally; the transform is kept
on the Dataset and inverted on output.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage, stats

from .backend import kernels
from .ess import EssTarget, ess_step
from .gp import CovMatrix, KernelParams, build_cov, kriging
from .hyper import (
    PriorConfig,
    default_ell,
    gibbs_mean,
    gibbs_tau2,
    mh_lengthscale,
    mh_nu,
    mh_sigma2,
    slope_prior_mean,
)
from .likelihoods import TLikParams, student_t_loglik
from .partition import WrapPartition, mh_sweep, reanchor_kmin, wrap_counts
from .util import TAU, wrap_angle


@dataclass(eq=False)
class Dataset:
    """Paired scalar inputs and angular responses in [0, tau).

    Rows are sorted by x on construction.  ``x_lo``/``x_hi`` define the
    affine map to the unit interval used internally; they default to the
    observed input range but can be widened (e.g. to share one scale across
    grouped tests).
    """

    x: np.ndarray
    y: np.ndarray
    x_lo: float = None
    x_hi: float = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("inputs and responses must be finite")
        if np.any(y < 0.0) or np.any(y >= TAU):
            raise ValueError("responses must lie in [0, tau)")
        order = np.argsort(x, kind="stable")
        self.x = x[order]
        self.y = y[order]
        if self.x_lo is None:
            self.x_lo = float(self.x[0])
        if self.x_hi is None:
            self.x_hi = float(self.x[-1])
        if not (self.x_hi > self.x_lo):
            raise ValueError("input range must have positive width")
        self._scaled = (self.x - self.x_lo) / (self.x_hi - self.x_lo)

    @property
    def n(self):
        return self.x.size

    @property
    def scaled_x(self):
        return self._scaled

    def scale(self, x):
        return (np.asarray(x, dtype=np.float64) - self.x_lo) / (self.x_hi - self.x_lo)

    def unscale(self, u):
        return self.x_lo + np.asarray(u, dtype=np.float64) * (self.x_hi - self.x_lo)


@dataclass
class FitConfig:
    """MCMC run configuration shared by the primary model and baselines."""

    iters: int = 10000
    burnin: int = 5000
    thin: int = 10
    kmin_init: int = -2
    kmin_reset_iter: int = 1000
    step_theta: float = 0.3
    step_sigma2: float = 0.3
    step_nu: float = 0.5
    priors: PriorConfig = field(default_factory=PriorConfig)

    def __post_init__(self):
        if not (0 <= self.burnin < self.iters):
            raise ValueError("burnin must satisfy 0 <= burnin < iters")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    def n_kept(self):
        return (self.iters - self.burnin) // self.thin


@dataclass(frozen=True, eq=False)
class ModelState:
    """One kept MCMC state of the wrapped-GP model (internal unit-scale x)."""

    part: WrapPartition
    k: np.ndarray
    z: np.ndarray
    alpha: float
    beta: float
    tau2: float
    theta: float
    sigma2: float
    nu: float


@dataclass(eq=False)
class Trace:
    """Thinned post-burn-in samples plus run metadata."""

    method: str
    samples: list
    n: int
    x_lo: float
    x_hi: float
    iters: int
    burnin: int
    thin: int
    seed: object
    accept: dict
    negate: bool = False

    @property
    def kept(self):
        return len(self.samples)


def prior_medians(priors):
    """Starting values for (theta, tau2, sigma2, nu).

    tau2, sigma2, and nu start at their prior medians.  The lengthscale
    starts at 0.01 on the unit-scaled inputs rather than its prior median:
    a near-flat correlation matrix at the start amplifies the noise carried
    by the initial latents through the jitter floor, blowing up the first
    scale draw and trapping the chain in a degenerate interpolation mode.
    """
    theta0 = 0.01
    tau20 = float(stats.invgamma.ppf(0.5, 0.5, scale=0.5))
    sigma20 = float(
        stats.gamma.ppf(0.5, priors.sigma2_shape, scale=1.0 / priors.sigma2_rate)
    )
    nu0 = priors.nu_min + math.log(2.0) / priors.nu_rate
    return theta0, tau20, sigma20, nu0


def channel_means(xs, y):
    """Collapse replicate inputs to per-input circular means.

    Replicate reads that straddle the circle boundary flip in blocks, which
    defeats pointwise jump scans; the resultant-vector mean per unique input
    is stable there.  Inputs without replicates pass through unchanged.
    """
    xu, inv = np.unique(xs, return_inverse=True)
    if xu.size == xs.size:
        return xs, y
    s = np.zeros(xu.size)
    c = np.zeros(xu.size)
    np.add.at(s, inv, np.sin(y))
    np.add.at(c, inv, np.cos(y))
    return xu, wrap_angle(np.mod(np.arctan2(s, c), TAU))


def initial_wraps(xs, y, lo, hi, slope=0.0):
    """Scan for downward response jumps exceeding pi between adjacent inputs
    and seed one wrap location per net count increment.

    Jumps are measured relative to the slope-implied rise: across a wide
    input gap the expected rise shrinks the apparent drop, so the raw
    adjacent difference alone misses wraps there.  The per-point counts are
    median-filtered and monotonized before placing locations: observation
    noise near the circle boundary flips single points back and forth, and
    a spurious wrap in the start state is effectively permanent (removing
    it re-anchors every point to its right, so the removal move never
    accepts).
    """
    drops = np.diff(y) - slope * np.diff(xs)
    inc = np.rint(-drops / TAU).astype(np.int64)  # signed: flip pairs cancel
    counts = np.concatenate([[0], np.cumsum(inc)])
    if counts.size >= 7:
        counts = ndimage.median_filter(counts, size=7, mode="nearest")
    counts = np.maximum.accumulate(counts)
    w = []
    for i in range(xs.size - 1):
        step = int(counts[i + 1] - counts[i])
        if step > 0 and xs[i + 1] > xs[i]:
            for j in range(step):
                w.append(xs[i] + (j + 1) / (step + 1) * (xs[i + 1] - xs[i]))
    return np.asarray(w, dtype=np.float64)


def resolve_priors(data, config):
    """Fill in the data-derived prior fields (slope prior mean, group size)."""
    ell = config.priors.ell or default_ell(data.n)
    mu0 = slope_prior_mean(data.scaled_x, data.y, ell)
    return replace(config.priors, mu0=mu0, ell=ell)


def scan_slope(data, ell=None):
    """Least-squares slope of the responses unwrapped by the jump scan.

    Sharper than the clamped local-slope average when wraps are present,
    since the scan credits the full-circle rise at each detected wrap; used
    to anchor the hierarchical log-slope field's starting values.
    """
    xs = data.scaled_x
    if ell is None:
        ell = default_ell(data.n)
    mu0 = slope_prior_mean(xs, data.y, ell)
    xu, yu = channel_means(xs, data.y)
    w = initial_wraps(xu, yu, float(xs[0]), float(xs[-1]), slope=mu0)
    part = WrapPartition(w, 0, float(xs[0]), float(xs[-1]))
    v = yu + TAU * wrap_counts(xu, part)
    return float(np.polyfit(xu, v, 1)[0])


def initialize(data, config, rng, priors=None):
    """Starting state: wrap locations from the jump scan, latents from a
    noise-aware smooth of the unwrapped responses, and hyperparameters at
    their starting values.

    The latents start at the GP smooth of y + tau*k rather than the raw
    unwrapped values: raw values carry the observation noise, and a
    noise-bearing latent vector under the noise-free GP prior blows up the
    first conjugate scale draw through the correlation matrix's smallest
    eigenvalues.  The smooth leaves the noise in the residuals, where the
    t likelihood expects it.
    """
    if priors is None:
        priors = resolve_priors(data, config)
    xs = data.scaled_x
    lo, hi = float(xs[0]), float(xs[-1])
    xu, yu = channel_means(xs, data.y)
    part = WrapPartition(
        initial_wraps(xu, yu, lo, hi, slope=priors.mu0),
        config.kmin_init,
        lo,
        hi,
    )
    k = wrap_counts(xs, part)
    v = data.y + TAU * k
    theta0, tau20, sigma20, nu0 = prior_medians(priors)
    trend = 0.0 + priors.mu0 * xs
    eta0 = sigma20 / tau20
    smoother = CovMatrix.from_matrix(
        kernels.sqexp_corr(xs, theta0, eta0 + 1e-8), eta0 + 1e-8
    )
    corr = kernels.sqexp_corr(xs, theta0, 0.0)
    z = trend + corr @ smoother.solve(v - trend)
    return ModelState(part, k, z, 0.0, priors.mu0, tau20, theta0, sigma20, nu0)


class WgpChain:
    """Mutable single-chain sampler state; one `sweep` is one MCMC iteration.

    Exposed so the hierarchical model can interleave per-test sweeps with
    its own updates.
    """

    def __init__(self, data, config, rng, priors=None):
        self.data = data
        self.config = config
        self.rng = rng
        self.priors = priors if priors is not None else resolve_priors(data, config)
        self.xs = data.scaled_x
        self.y = data.y
        state = initialize(data, config, rng, priors=self.priors)
        self.part = state.part
        self.k = state.k
        self.z = state.z
        self.alpha = state.alpha
        self.beta = state.beta
        self.tau2 = state.tau2
        self.theta = state.theta
        self.sigma2 = state.sigma2
        self.nu = state.nu
        self.cov = build_cov(self.xs, KernelParams(self.theta, 1.0))
        self.counts = {
            "shift": [0, 0],
            "grow": [0, 0],
            "shrink": [0, 0],
            "theta": [0, 0],
            "sigma2": [0, 0],
            "nu": [0, 0],
        }
        self.ess_shrinks = 0

    def sweep(self, iteration, priors=None):
        """One full iteration; ``priors`` may override the trend prior (used
        by the hierarchical model to inject the distance-informed slope)."""
        p = priors if priors is not None else self.priors
        cfg = self.config
        tlik = TLikParams(self.sigma2, self.nu)

        self.part, self.k, flags = mh_sweep(
            self.part,
            self.xs,
            lambda kk: student_t_loglik(self.y, self.z, kk, tlik),
            self.rng,
        )
        self.counts["shift"][0] += sum(flags["shift"])
        self.counts["shift"][1] += len(flags["shift"])
        self.counts["grow"][0] += int(flags["grow"])
        self.counts["grow"][1] += 1
        if flags["shrink"] is not None:
            self.counts["shrink"][0] += int(flags["shrink"])
            self.counts["shrink"][1] += 1

        target = EssTarget(
            self.alpha + self.beta * self.xs,
            self.cov.scaled(self.tau2),
            lambda zz: student_t_loglik(self.y, zz, self.k, tlik),
        )
        self.z, shrinks = ess_step(self.z, target, self.rng)
        self.ess_shrinks += shrinks

        mp = gibbs_mean(self.z, self.xs, self.tau2, self.theta, p, self.rng, cov=self.cov)
        self.alpha, self.beta = mp.alpha, mp.beta
        self.tau2 = gibbs_tau2(
            self.z, self.xs, self.alpha, self.beta, self.theta, self.rng, cov=self.cov
        )
        self.theta, self.cov, acc = mh_lengthscale(
            self.theta,
            self.z,
            self.xs,
            self.alpha,
            self.beta,
            self.tau2,
            p,
            self.rng,
            cov=self.cov,
            step=cfg.step_theta,
        )
        self.counts["theta"][0] += int(acc)
        self.counts["theta"][1] += 1

        resid = self.y - (self.z - TAU * self.k)
        self.sigma2, acc = mh_sigma2(
            self.sigma2, resid, self.nu, p, self.rng, step=cfg.step_sigma2
        )
        self.counts["sigma2"][0] += int(acc)
        self.counts["sigma2"][1] += 1
        self.nu, acc = mh_nu(self.nu, resid, self.sigma2, p, self.rng, step=cfg.step_nu)
        self.counts["nu"][0] += int(acc)
        self.counts["nu"][1] += 1

        if iteration == cfg.kmin_reset_iter:
            # translate the whole state along the identifiability orbit so
            # the latent level matches the trend prior's center: residuals
            # and the GP quadratic form are exactly invariant, but a level
            # left at the start anchor makes the intercept prior drag the
            # trend off the latents and the scale absorbs the gap forever
            circles = math.floor(float(np.min(self.z)) / TAU)
            self.z = self.z - TAU * circles
            self.alpha = self.alpha - TAU * circles
            self.part = reanchor_kmin(self.part, self.z)
            self.k = wrap_counts(self.xs, self.part)

    def snapshot(self):
        return ModelState(
            self.part,
            self.k.copy(),
            self.z.copy(),
            self.alpha,
            self.beta,
            self.tau2,
            self.theta,
            self.sigma2,
            self.nu,
        )

    def acceptance_rates(self):
        out = {}
        for name, (acc, tot) in self.counts.items():
            out[name] = acc / tot if tot else 0.0
        return out


def fit(data, config, rng, negate=False):
    """Run the MCMC and return the thinned post-burn-in trace.

    ``rng`` may be an integer seed or a numpy Generator; an integer is
    recorded in the trace metadata.
    """
    if data.n < 10:
        raise ValueError("at least 10 observations are required")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    chain = WgpChain(data, config, rng)
    samples = []
    for t in range(1, config.iters + 1):
        chain.sweep(t)
        if t > config.burnin and (t - config.burnin) % config.thin == 0:
            samples.append(chain.snapshot())
    return Trace(
        method="wgp",
        samples=samples,
        n=data.n,
        x_lo=data.x_lo,
        x_hi=data.x_hi,
        iters=config.iters,
        burnin=config.burnin,
        thin=config.thin,
        seed=seed,
        accept=chain.acceptance_rates(),
        negate=negate,
    )


@dataclass(eq=False)
class PredictionResult:
    """Per-test-input posterior predictive summaries and retained samples.

    ``y_samples`` has shape (n_test, n_kept): one anchored predictive draw
    per kept posterior sample (observation noise included), used for CRPS.
    ``k_samples`` retains the wrap-count draws.
    """

    x: np.ndarray
    mean_unwrapped: np.ndarray
    mean_wrapped: np.ndarray
    variance: np.ndarray
    lo95: np.ndarray
    hi95: np.ndarray
    k_mean: np.ndarray
    k_var: np.ndarray
    y_samples: np.ndarray
    k_samples: np.ndarray = None


def predict(trace, data, xnew, rng):
    """Posterior predictive summaries at new inputs.

    Per kept sample, latents at the new inputs are drawn pointwise from the
    kriging conditional, wrap counts are induced by that sample's partition,
    and a Student-t observation deviate is added to form the retained
    predictive draw.  The reported variance is the mean t-noise variance
    plus the across-sample variance of the noiseless predictions.
    """
    if trace.kept == 0:
        raise ValueError("trace has no kept samples")
    rng = np.random.default_rng(rng)
    xnew = np.atleast_1d(np.asarray(xnew, dtype=np.float64))
    xs = data.scaled_x
    xq = data.scale(xnew)
    n_kept = trace.kept
    n_new = xnew.size
    u_draws = np.empty((n_kept, n_new))
    y_draws = np.empty((n_kept, n_new))
    k_draws = np.empty((n_kept, n_new))
    noise = np.empty(n_kept)
    for t, s in enumerate(trace.samples):
        params = KernelParams(s.theta, s.tau2)
        mean, var = kriging(xs, s.z, xq, s.alpha, s.beta, params)
        zq = mean + np.sqrt(var) * rng.standard_normal(n_new)
        kq = kernels.eval_k_batch(xq, s.part.w, s.part.k_min)
        u = zq - TAU * kq
        eps = math.sqrt(s.sigma2) * rng.standard_t(s.nu, size=n_new)
        u_draws[t] = u
        y_draws[t] = u + eps
        k_draws[t] = kq
        noise[t] = s.sigma2 * s.nu / (s.nu - 2.0)
    mean_unwrapped = u_draws.mean(axis=0)
    spread = u_draws.var(axis=0, ddof=1) if n_kept > 1 else np.zeros(n_new)
    variance = noise.mean() + spread
    lo95, hi95 = np.percentile(y_draws, [2.5, 97.5], axis=0)
    k_mean = k_draws.mean(axis=0)
    k_var = ((k_draws - k_mean) ** 2).mean(axis=0)
    return PredictionResult(
        x=xnew,
        mean_unwrapped=mean_unwrapped,
        mean_wrapped=wrap_angle(mean_unwrapped),
        variance=variance,
        lo95=wrap_angle(lo95),
        hi95=wrap_angle(hi95),
        k_mean=k_mean,
        k_var=k_var,
        y_samples=y_draws.T,
        k_samples=k_draws.T,
    )
