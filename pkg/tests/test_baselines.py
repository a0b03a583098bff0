import math

import numpy as np
import pytest

from circgp.baselines import (
    CoupledConfig,
    fit_coupled,
    fit_ordinary,
    predict_coupled,
    predict_ordinary,
)
from circgp.metrics import circ_residual
from circgp.model import Dataset, FitConfig, fit, predict
from circgp.simulate import gen_lhs, gen_wgp_instance

TAU = math.tau

MED = FitConfig(iters=1500, burnin=750, thin=5, kmin_reset_iter=300)
SMALL = FitConfig(iters=600, burnin=300, thin=5, kmin_reset_iter=150)


def wrapped_linear(n, alpha, beta, seed):
    x = np.sort(gen_lhs(n, (0.0, 1.0), seed))
    y = np.mod(alpha + beta * x, TAU)
    y[y >= TAU] -= TAU
    return Dataset(x, y), np.floor((alpha + beta * x) / TAU).astype(int)


def anchored(k):
    return k - k[0]


def test_coupled_noiseless_recovery():
    data, k_true = wrapped_linear(60, 1.0, 12.0, 3)
    tr = fit_coupled(data, MED, 5)
    want = anchored(k_true)
    exact = np.mean([np.array_equal(anchored(s.k), want) for s in tr.samples])
    assert exact > 0.8


def test_coupled_window_zero_freezes_counts():
    data, _ = wrapped_linear(30, 1.0, 12.0, 7)
    tr = fit_coupled(data, SMALL, 8, coupled=CoupledConfig(window=0))
    first = tr.samples[0].k
    for s in tr.samples:
        assert np.array_equal(s.k, first)


def test_coupled_config_validation():
    with pytest.raises(ValueError):
        CoupledConfig(window=-1)


def test_coupled_misidentifies_wraps_with_noise_majority_of_seeds():
    # noisy configuration: the coupled baseline's count profile misses or
    # misplaces at least one wrap while the primary model's does not
    coupled_bad = 0
    primary_bad = 0
    seeds = range(10)
    for seed in seeds:
        x = gen_lhs(50, (0, 1), 100 + seed)
        inst = gen_wgp_instance(x, 10.0, 20.0, 0.01, 1.0, 0.2, 1e6, 200 + seed)
        want = anchored(inst.k)
        tr_c = fit_coupled(inst.data, MED, 300 + seed)
        k_mean_c = np.mean([anchored(s.k) for s in tr_c.samples], axis=0)
        coupled_bad += np.max(np.abs(k_mean_c - want)) > 0.5
        tr_w = fit(inst.data, MED, 400 + seed)
        k_mean_w = np.mean([anchored(s.k) for s in tr_w.samples], axis=0)
        primary_bad += np.max(np.abs(k_mean_w - want)) > 0.5
    assert coupled_bad > len(seeds) / 2
    assert primary_bad < coupled_bad


def test_ordinary_linear_noiseless():
    gen = np.random.default_rng(9)
    x = np.sort(gen.uniform(0, 1, 30))
    y = 1.0 + 4.0 * x  # stays inside [0, tau): no wrapping at all
    data = Dataset(x, y)
    tr = fit_ordinary(data, MED, 10)
    pred = predict_ordinary(tr, data, x, 11)
    assert np.sqrt(np.mean((pred.mean_unwrapped - y) ** 2)) < 0.1


def test_ordinary_predictions_escape_domain():
    # a clean wrapped instance: the Euclidean GP interpolates across the
    # jumps and overshoots the circle boundaries (frozen seed exhibits it)
    x = gen_lhs(50, (0, 1), 3)
    inst = gen_wgp_instance(x, 10.0, 20.0, 0.01, 1.0, 1e-6, 5.0, 103)
    tr = fit_ordinary(inst.data, FitConfig(iters=4000, burnin=2000, thin=4), 7)
    pred = predict_ordinary(tr, inst.data, np.linspace(0, 1, 2000), 8)
    assert np.any((pred.mean_unwrapped < 0.0) | (pred.mean_unwrapped > TAU))


def test_ordinary_constant_data():
    x = np.linspace(0, 1, 20)
    data = Dataset(x, np.full(20, 2.0))
    tr = fit_ordinary(data, SMALL, 12)
    pred = predict_ordinary(tr, data, np.linspace(0, 1, 40), 13)
    assert np.allclose(pred.mean_unwrapped, 2.0, atol=0.05)
    tau2_hat = np.mean([s.tau2 * (1 + s.eta) for s in tr.samples])
    assert np.all(pred.variance <= tau2_hat * 1.1 + 1e-6)


def test_ordinary_variance_exceeds_primary():
    # mean predictive variance over the grid, ten seeds
    grid = np.linspace(0, 1, 100)
    ords, prims = [], []
    for seed in range(10):
        x = gen_lhs(50, (0, 1), 500 + seed)
        inst = gen_wgp_instance(x, 10.0, 20.0, 0.01, 1.0, 1e-6, 5.0, 600 + seed)
        tr_o = fit_ordinary(inst.data, SMALL, 700 + seed)
        p_o = predict_ordinary(tr_o, inst.data, grid, 800 + seed)
        tr_w = fit(inst.data, SMALL, 900 + seed)
        p_w = predict(tr_w, inst.data, grid, 1000 + seed)
        ords.append(p_o.variance.mean())
        prims.append(p_w.variance.mean())
    assert np.mean(ords) > np.mean(prims)


def test_coupled_predictions_roundtrip_shapes():
    data, _ = wrapped_linear(30, 1.0, 12.0, 31)
    tr = fit_coupled(data, SMALL, 32)
    pred = predict_coupled(tr, data, np.linspace(0, 1, 25), 33)
    assert pred.mean_wrapped.shape == (25,)
    assert np.all(pred.mean_wrapped >= 0) and np.all(pred.mean_wrapped < TAU)
    assert pred.y_samples.shape == (25, tr.kept)


def test_coupled_tracks_truth_on_clean_data():
    data, k_true = wrapped_linear(60, 1.0, 12.0, 41)
    tr = fit_coupled(data, MED, 42)
    pred = predict_coupled(tr, data, data.x, 43)
    resid = circ_residual(data.y, pred.mean_wrapped)
    assert np.median(resid) < 0.1
