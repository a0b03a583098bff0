import math

import numpy as np
import pytest

from circgp.hier import slope_to_distance
from circgp.simulate import (
    LOG_GAP_STRATA,
    RFID_FREQ_MHZ,
    SPEED_OF_LIGHT,
    gen_lhs,
    gen_log,
    gen_log_gapped,
    gen_rfid_like,
    gen_wgp_instance,
    log_gap_allocation,
    slope_for_distance,
)

TAU = math.tau


def test_lhs_single_point():
    x = gen_lhs(1, (0.0, 1.0), 1)
    assert x.size == 1 and 0.0 <= x[0] < 1.0


def test_lhs_stratification():
    x = gen_lhs(10, (0.0, 1.0), 2)
    strata = np.floor(np.sort(x) * 10).astype(int)
    assert np.array_equal(strata, np.arange(10))


def test_lhs_bounds_and_determinism():
    a = gen_lhs(50, (2.0, 7.0), 3)
    b = gen_lhs(50, (2.0, 7.0), 3)
    assert np.array_equal(a, b)
    assert a.min() >= 2.0 and a.max() < 7.0


def test_gen_log_endpoints():
    inst = gen_log(np.array([0.0, 2.5]), 1, noise_sd=0.0)
    row0 = np.argmin(inst.data.x)
    row1 = np.argmax(inst.data.x)
    assert inst.data.y[row0] == pytest.approx(0.0, abs=1e-12)
    z_hi = 15.0 * math.log(3.5)
    assert inst.z[row1] == pytest.approx(z_hi, rel=1e-12)
    assert inst.data.y[row1] == pytest.approx(z_hi - 2 * TAU, rel=1e-9)
    assert inst.k[row1] == 2


def test_gen_log_deterministic_when_noiseless():
    x = gen_lhs(30, (0.0, 2.5), 4)
    a = gen_log(x, 5, noise_sd=0.0)
    b = gen_log(x, 99, noise_sd=0.0)
    assert np.array_equal(a.data.y, b.data.y)


def test_gen_log_range_and_domain():
    x = gen_lhs(200, (0.0, 2.5), 6)
    inst = gen_log(x, 7)
    assert np.all(inst.data.y >= 0.0) and np.all(inst.data.y < TAU)
    with pytest.raises(ValueError):
        gen_log(np.array([2.6]), 8)


def test_log_gap_allocation_200():
    assert log_gap_allocation(200) == (38, 137, 25)


def test_log_gap_allocation_sums():
    for n in range(20, 61):
        assert sum(log_gap_allocation(n)) == n


def test_gen_log_gapped_leaves_gaps():
    inst = gen_log_gapped(200, 9)
    u = inst.data.x / 2.5
    assert not np.any((u > 0.15) & (u < 0.25))
    assert not np.any((u > 0.8) & (u < 0.9))
    assert inst.data.n == 200


def test_gen_log_gapped_min_size():
    with pytest.raises(ValueError):
        gen_log_gapped(19, 1)


def test_log_wrap_sits_inside_first_gap():
    # the function's first full-circle crossing lies inside the censored band
    u1 = (math.exp(TAU / 15.0) - 1.0) / 2.5
    assert LOG_GAP_STRATA[0][1] < u1 < LOG_GAP_STRATA[1][0]


def test_gen_wgp_instance_constant_case():
    x = gen_lhs(25, (0, 1), 10)
    inst = gen_wgp_instance(x, math.pi, 0.0, 0.1, 1e-12, 1e-12, 5.0, 11)
    assert np.allclose(inst.data.y, math.pi, atol=1e-4)
    assert np.all(inst.k == 0)


def test_gen_wgp_instance_wrap_count():
    x = gen_lhs(50, (0, 1), 12)
    inst = gen_wgp_instance(x, 10.0, 20.0, 0.01, 1.0, 0.05, 5.0, 13)
    assert 2 <= inst.k.max() - inst.k.min() <= 6


def test_gen_wgp_instance_identity():
    x = gen_lhs(40, (0, 1), 14)
    inst = gen_wgp_instance(x, 10.0, 20.0, 0.01, 1.0, 0.05, 5.0, 15)
    recon = np.mod(inst.z - TAU * inst.k + inst.eps, TAU)
    recon[recon >= TAU] -= TAU
    assert np.allclose(recon, inst.data.y, atol=1e-9)


def test_gen_wgp_instance_deterministic():
    x = gen_lhs(20, (0, 1), 16)
    a = gen_wgp_instance(x, 5.0, 10.0, 0.05, 1.0, 0.1, 4.0, 17)
    b = gen_wgp_instance(x, 5.0, 10.0, 0.05, 1.0, 0.1, 4.0, 17)
    assert np.array_equal(a.data.y, b.data.y)
    assert np.array_equal(a.z, b.z)


def test_rfid_one_wrap_distance():
    # slope * band span = tau at d = c / (2 * span)
    span_hz = (RFID_FREQ_MHZ[-1] - RFID_FREQ_MHZ[0]) * 1e6
    d_one = SPEED_OF_LIGHT / (2.0 * span_hz)
    rfid = gen_rfid_like(
        np.array([d_one]),
        21,
        censor_frac=0.0,
        wiggle_tau2=1e-12,
        sigma2=1e-12,
        reads_per_channel=1,
    )
    y = rfid.datasets[0].y
    jumps = np.sum(np.diff(y) < -math.pi)
    assert jumps == 1


def test_rfid_zero_distance_no_wrap():
    rfid = gen_rfid_like(
        np.array([0.0]), 22, censor_frac=0.0, wiggle_tau2=1e-12, sigma2=1e-12,
        reads_per_channel=1,
    )
    assert np.sum(np.diff(rfid.datasets[0].y) < -math.pi) == 0


def test_rfid_no_censoring_keeps_all_channels():
    rfid = gen_rfid_like(np.array([2.0, 5.0]), 23, censor_frac=0.0)
    for data in rfid.datasets:
        assert np.unique(data.x).size == 50
        assert data.n == 150  # three reads per channel by default


def test_rfid_censoring_contiguous():
    rfid = gen_rfid_like(np.array([3.0]), 24, censor_frac=0.2)
    data = rfid.datasets[0]
    assert np.unique(data.x).size == 40
    missing = np.setdiff1d(RFID_FREQ_MHZ, data.x)
    idx = np.searchsorted(RFID_FREQ_MHZ, missing)
    assert np.array_equal(np.diff(idx), np.ones(idx.size - 1))


def test_rfid_slope_round_trip():
    d = np.array([1.0, 3.7, 9.2])
    slopes = slope_for_distance(d)
    back = np.array([slope_to_distance(s) for s in slopes])
    assert np.allclose(back, d, rtol=1e-12)
