"""Hierarchical multi-test model: per-test wrapped GPs whose slope priors
are tied through a latent distance-indexed GP on the log-slope scale, plus
the slope-to-distance conversion.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ess import EssTarget, ess_step
from .gp import KernelParams, build_cov, kriging
from .hyper import PriorConfig, default_ell, gibbs_tau2, mh_lengthscale
from .likelihoods import slope_field_loglik
from .model import FitConfig, Trace, WgpChain, prior_medians, scan_slope
from .simulate import SPEED_OF_LIGHT

TAU = math.tau


@dataclass
class HierConfig:
    """Configuration of a hierarchical fit.

    ``fit`` configures each per-test chain; ``sigma_beta_sq`` is the common
    slope variance around the exponentiated latent field.
    """

    fit: FitConfig = field(default_factory=FitConfig)
    sigma_beta_sq: float = 0.1


@dataclass(frozen=True, eq=False)
class HierSample:
    delta: np.ndarray
    tau2_delta: float
    theta_delta: float


@dataclass(eq=False)
class HierTrace:
    """Per-test traces plus the latent log-slope field samples."""

    tests: list
    hier_samples: list
    distances: np.ndarray
    d_lo: float
    d_hi: float
    sigma_beta_sq: float
    iters: int
    burnin: int
    thin: int
    seed: object

    @property
    def kept(self):
        return len(self.hier_samples)


def slope_to_distance(slope):
    """Distance implied by a phase-frequency slope in rad/Hz: c/(4*pi) * slope."""
    if slope < 0.0:
        raise ValueError("slope must be nonnegative")
    return SPEED_OF_LIGHT / (2.0 * TAU) * slope


def hier_fit(datasets, distances, config, rng):
    """Joint MCMC over per-test wrapped GPs and the latent log-slope field.

    Within one iteration each test runs a full sweep with its slope prior
    centred at exp(delta_i); the field's scale and lengthscale then update
    by Gibbs/MH, and the field itself by elliptical slice sampling against
    the just-accepted slopes.  Tests own independent RNG substreams, so
    results do not depend on per-test execution order.
    """
    m = len(datasets)
    distances = np.asarray(distances, dtype=np.float64)
    if m < 2:
        raise ValueError("at least two tests are required")
    if distances.size != m:
        raise ValueError("one distance per test is required")
    if np.unique(distances).size != m:
        raise ValueError("distances must be distinct")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    streams = rng.spawn(m + 1)
    test_rngs, hier_rng = streams[:m], streams[m]

    d_lo, d_hi = float(distances.min()), float(distances.max())
    d_scaled = (distances - d_lo) / (d_hi - d_lo)
    sigma_beta = math.sqrt(config.sigma_beta_sq)

    base_priors = []
    delta = np.empty(m)
    for i, data in enumerate(datasets):
        ell = config.fit.priors.ell or default_ell(data.n)
        # anchor the log-slope field at the scan-unwrapped slope: a low
        # anchor lets each test's GP absorb the trend and the slope prior
        # then pins beta there
        delta[i] = math.log(max(scan_slope(data, ell), 1e-3))
        base_priors.append(
            replace(config.fit.priors, ell=ell, beta_var=config.sigma_beta_sq)
        )
    chains = [
        WgpChain(
            datasets[i],
            config.fit,
            test_rngs[i],
            priors=replace(base_priors[i], mu0=math.exp(delta[i])),
        )
        for i in range(m)
    ]

    hier_priors = PriorConfig()
    theta_delta, tau2_delta, _, _ = prior_medians(hier_priors)
    cov_delta = build_cov(d_scaled, KernelParams(theta_delta, 1.0))

    kept_tests = [[] for _ in range(m)]
    hier_samples = []
    cfg = config.fit
    for t in range(1, cfg.iters + 1):
        for i, chain in enumerate(chains):
            chain.sweep(t, priors=replace(base_priors[i], mu0=math.exp(delta[i])))
        betas = np.array([c.beta for c in chains])
        tau2_delta = gibbs_tau2(
            delta, d_scaled, 0.0, 0.0, theta_delta, hier_rng, cov=cov_delta
        )
        theta_delta, cov_delta, _ = mh_lengthscale(
            theta_delta,
            delta,
            d_scaled,
            0.0,
            0.0,
            tau2_delta,
            hier_priors,
            hier_rng,
            cov=cov_delta,
            step=cfg.step_theta,
        )
        target = EssTarget(
            np.zeros(m),
            cov_delta.scaled(tau2_delta),
            lambda dd: slope_field_loglik(dd, betas, sigma_beta),
        )
        delta, _ = ess_step(delta, target, hier_rng)
        if t > cfg.burnin and (t - cfg.burnin) % cfg.thin == 0:
            for i, chain in enumerate(chains):
                kept_tests[i].append(chain.snapshot())
            hier_samples.append(HierSample(delta.copy(), tau2_delta, theta_delta))

    tests = [
        Trace(
            method="wgp",
            samples=kept_tests[i],
            n=datasets[i].n,
            x_lo=datasets[i].x_lo,
            x_hi=datasets[i].x_hi,
            iters=cfg.iters,
            burnin=cfg.burnin,
            thin=cfg.thin,
            seed=None,
            accept=chains[i].acceptance_rates(),
        )
        for i in range(m)
    ]
    return HierTrace(
        tests=tests,
        hier_samples=hier_samples,
        distances=distances,
        d_lo=d_lo,
        d_hi=d_hi,
        sigma_beta_sq=config.sigma_beta_sq,
        iters=cfg.iters,
        burnin=cfg.burnin,
        thin=cfg.thin,
        seed=seed,
    )


def predict_delta(htrace, dnew, rng=None):
    """Posterior mean and variance of the exponentiated log-slope field at
    new distances.

    Per kept sample the field is kriged with zero mean at the new points;
    the pointwise Gaussian is exponentiated analytically (lognormal
    moments), so a single kept sample still reports the kriging variance.
    ``rng`` is accepted for interface symmetry but unused.
    """
    if htrace.kept == 0:
        raise ValueError("trace has no kept samples")
    dnew = np.atleast_1d(np.asarray(dnew, dtype=np.float64))
    dq = (dnew - htrace.d_lo) / (htrace.d_hi - htrace.d_lo)
    d_scaled = (htrace.distances - htrace.d_lo) / (htrace.d_hi - htrace.d_lo)
    n_kept = htrace.kept
    ln_mean = np.empty((n_kept, dnew.size))
    ln_var = np.empty((n_kept, dnew.size))
    for t, s in enumerate(htrace.hier_samples):
        mean, var = kriging(
            d_scaled,
            s.delta,
            dq,
            0.0,
            0.0,
            KernelParams(s.theta_delta, s.tau2_delta),
        )
        ln_mean[t] = np.exp(mean + 0.5 * var)
        ln_var[t] = np.expm1(var) * np.exp(2.0 * mean + var)
    center = ln_mean.mean(axis=0)
    spread = ((ln_mean - center) ** 2).mean(axis=0)
    return center, ln_var.mean(axis=0) + spread
