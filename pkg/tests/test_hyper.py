import math

import numpy as np
import pytest
from scipy import stats

from circgp.exceptions import DegenerateGroup
from circgp.gp import KernelParams, build_cov, mvn_draw
from circgp.hyper import (
    PriorConfig,
    gibbs_mean,
    gibbs_tau2,
    mh_lengthscale,
    mh_nu,
    mh_sigma2,
    slope_prior_mean,
)

from conftest import FakeRng


def test_slope_prior_linear():
    x = np.linspace(0, 1, 20)
    assert slope_prior_mean(x, 2.0 * x, 5) == pytest.approx(2.0, rel=1e-9)


def test_slope_prior_negative_clamped():
    x = np.linspace(0, 1, 20)
    assert slope_prior_mean(x, -2.0 * x, 5) == 0.0


def test_slope_prior_mixed_groups():
    # four groups of five: slopes +4, +4, -4, -4 -> mean of (4, 4, 0, 0)
    x = np.linspace(0, 1, 20)
    y = np.empty(20)
    for g, s in enumerate([4.0, 4.0, -4.0, -4.0]):
        sl = slice(5 * g, 5 * g + 5)
        y[sl] = s * x[sl]
    assert slope_prior_mean(x, y, 5) == pytest.approx(2.0, rel=1e-9)


def test_slope_prior_degenerate_group_warns():
    x = np.array([0.0, 0.1, 0.2, 0.5, 0.5, 0.5])
    y = np.array([0.0, 0.2, 0.4, 1.0, 1.1, 0.9])
    with pytest.warns(DegenerateGroup):
        got = slope_prior_mean(x, y, 3)
    assert got == pytest.approx(2.0, rel=1e-9)  # only the first group counts


def test_slope_prior_shift_invariant(rng):
    x = np.sort(rng.uniform(0, 1, 30))
    y = rng.standard_normal(30)
    a = slope_prior_mean(x, y, 6)
    b = slope_prior_mean(x, y + 13.7, 6)
    assert a == pytest.approx(b, rel=1e-12)


def test_gibbs_mean_ols_limit():
    # near-identity correlation and a flat prior reduce to least squares
    gen = np.random.default_rng(21)
    x = np.linspace(0, 1, 25)
    z = 3.0 + 5.0 * x + 0.01 * gen.standard_normal(25)
    prior = PriorConfig(mu0=0.0, sigma0_sq=1e12)
    cov = build_cov(x, KernelParams(1e-6, 1.0), jitter=1e-10)
    draws = np.array(
        [
            (
                lambda mp: (mp.alpha, mp.beta)
            )(gibbs_mean(z, x, 1.0, 1e-6, prior, gen, cov=cov))
            for _ in range(4000)
        ]
    )
    b_ols, a_ols = np.polyfit(x, z, 1)
    assert draws[:, 0].mean() == pytest.approx(a_ols, abs=0.02)
    assert draws[:, 1].mean() == pytest.approx(b_ols, abs=0.04)


def test_gibbs_mean_prior_domination():
    gen = np.random.default_rng(22)
    x = np.linspace(0, 1, 25)
    z = 3.0 + 5.0 * x
    prior = PriorConfig(mu0=1.5, sigma0_sq=1e-12)
    cov = build_cov(x, KernelParams(0.1, 1.0))
    mp = gibbs_mean(z, x, 1.0, 0.1, prior, gen, cov=cov)
    assert mp.alpha == pytest.approx(0.0, abs=1e-4)
    assert mp.beta == pytest.approx(1.5, abs=1e-4)


def test_gibbs_mean_recovers_truth():
    gen = np.random.default_rng(23)
    x = np.sort(gen.uniform(0, 1, 60))
    tau2 = 0.001
    cov = build_cov(x, KernelParams(0.05, 1.0))
    z = 2.0 + 4.0 * x + mvn_draw(np.zeros(60), cov.scaled(tau2), gen)
    prior = PriorConfig(mu0=0.0, sigma0_sq=100.0)
    draws = np.array(
        [
            (lambda mp: (mp.alpha, mp.beta))(
                gibbs_mean(z, x, tau2, 0.05, prior, gen, cov=cov)
            )
            for _ in range(2000)
        ]
    )
    for truth, col in ((2.0, 0), (4.0, 1)):
        mean, sd = draws[:, col].mean(), draws[:, col].std()
        assert abs(mean - truth) < 3 * sd + 1e-3


def test_gibbs_tau2_unit_case_median():
    # n=1 with zero residual: posterior IGa(1, 1/2)
    gen = np.random.default_rng(31)
    x = np.array([0.5])
    z = np.array([0.7])
    draws = np.array(
        [gibbs_tau2(z, x, 0.7, 0.0, 0.05, gen) for _ in range(100_000)]
    )
    want = stats.invgamma.median(1.0, scale=0.5)
    assert np.median(draws) == pytest.approx(want, rel=0.02)


def test_gibbs_tau2_quadform_scaling():
    # rate minus 1/2 scales with the square of the residuals
    gen = np.random.default_rng(32)
    x = np.linspace(0, 1, 12)
    cov = build_cov(x, KernelParams(1e-6, 1.0), jitter=1e-10)  # ~ identity
    e = np.sin(5 * x)
    for c in (1.0, 3.0):
        draws = np.array(
            [gibbs_tau2(c * e, x, 0.0, 0.0, 1e-6, gen, cov=cov) for _ in range(50_000)]
        )
        a_n = 0.5 * (1 + 12)
        b_hat = a_n / np.mean(1.0 / draws)
        want = 0.5 * (1.0 + c * c * float(e @ e))
        assert b_hat == pytest.approx(want, rel=0.02)


def test_gibbs_tau2_distribution_ks():
    gen = np.random.default_rng(33)
    x = np.linspace(0, 1, 5)
    cov = build_cov(x, KernelParams(1e-6, 1.0), jitter=1e-10)
    e = np.array([0.3, -0.5, 0.8, 0.1, -0.2])
    draws = np.array(
        [gibbs_tau2(e, x, 0.0, 0.0, 1e-6, gen, cov=cov) for _ in range(100_000)]
    )
    a_n = 3.0
    b_n = 0.5 * (1.0 + float(e @ e))
    stat = stats.kstest(draws, lambda v: stats.invgamma.cdf(v, a_n, scale=b_n)).statistic
    assert stat < 1.63 / math.sqrt(draws.size)  # 1% critical value


def test_mh_lengthscale_zero_step_accepts():
    gen = np.random.default_rng(41)
    x = np.linspace(0, 1, 10)
    z = np.sin(3 * x)
    theta, cov, accepted = mh_lengthscale(
        0.05, z, x, 0.0, 0.0, 1.0, PriorConfig(), gen, step=0.0
    )
    assert accepted and theta == 0.05


def test_mh_lengthscale_recovers_scale():
    gen = np.random.default_rng(42)
    x = np.sort(gen.uniform(0, 1, 200))
    cov0 = build_cov(x, KernelParams(0.01, 1.0))
    z = mvn_draw(np.zeros(200), cov0, gen)
    prior = PriorConfig()
    theta, cov = 0.1, None
    kept = []
    for i in range(1500):
        theta, cov, _ = mh_lengthscale(theta, z, x, 0.0, 0.0, 1.0, prior, gen, cov=cov)
        if i >= 500:
            kept.append(theta)
    med = float(np.median(kept))
    assert 0.003 <= med <= 0.03


def test_mh_sigma2_zero_residuals_shrink():
    gen = np.random.default_rng(43)
    resid = np.zeros(30)
    prior = PriorConfig()
    s2 = 0.455
    kept = []
    for i in range(4000):
        s2, _ = mh_sigma2(s2, resid, 5.0, prior, gen)
        if i >= 500:
            kept.append(s2)
    prior_median = stats.gamma.median(0.5, scale=2.0)
    assert np.median(kept) < prior_median


def test_mh_nu_outliers_lower_dof():
    gen = np.random.default_rng(44)
    clean = 0.2 * np.random.default_rng(1).standard_normal(60)
    dirty = clean.copy()
    dirty[:5] = 10 * 0.2  # ten-sigma outliers
    prior = PriorConfig()

    def run(resid):
        g = np.random.default_rng(45)
        nu = 10.0
        kept = []
        for i in range(4000):
            nu, _ = mh_nu(nu, resid, 0.04, prior, g)
            if i >= 500:
                kept.append(nu)
        return float(np.median(kept))

    assert run(dirty) < run(clean)


def test_mh_nu_below_support_rejected():
    prior = PriorConfig()
    # scripted normal makes the proposal exactly 2.5 < 3
    eta = math.log(2.5 / 3.5) / 0.5
    rng = FakeRng([("standard_normal", eta)])
    nu, accepted = mh_nu(3.5, np.zeros(5), 0.1, prior, rng, step=0.5)
    assert nu == 3.5 and accepted is False


def test_mh_sigma2_two_bin_stationarity():
    # long chain bin frequencies match the grid-integrated posterior
    gen = np.random.default_rng(46)
    resid = np.random.default_rng(2).standard_normal(20) * 0.5
    prior = PriorConfig()
    nu = 6.0
    s2 = 0.3
    kept = np.empty(40_000)
    for i in range(kept.size):
        s2, _ = mh_sigma2(s2, resid, nu, prior, gen)
        kept[i] = s2
    kept = kept[2000:]
    from circgp.backend import kernels

    grid = np.exp(np.linspace(math.log(1e-4), math.log(50.0), 4000))
    logpost = np.array(
        [
            kernels.t_loglik_sum(resid, g, nu)
            + (prior.sigma2_shape - 1.0) * math.log(g)
            - prior.sigma2_rate * g
            for g in grid
        ]
    )
    dens = np.exp(logpost - logpost.max())
    weights = dens * np.gradient(grid)
    cut = float(np.median(kept))
    p_grid = weights[grid < cut].sum() / weights.sum()
    p_chain = float(np.mean(kept < cut))  # = 0.5 by construction
    assert abs(p_grid - p_chain) < 0.05
