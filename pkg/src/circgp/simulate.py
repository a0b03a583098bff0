"""Synthetic data generators for experiments and oracle tests.

Every generator is a pure function of its seed: the withheld truth (latent
values, wrap counts, noise) is returned alongside the dataset so tests can
score recovery.
"""

import math
from dataclasses import dataclass

import numpy as np

from .gp import KernelParams, build_cov, mvn_draw
from .model import Dataset
from .util import TAU, wrap_angle

SPEED_OF_LIGHT = 299_792_458.0  # m/s

RFID_FREQ_MHZ = np.linspace(902.75, 927.25, 50)

LOG_GAP_STRATA = ((0.0, 0.15), (0.25, 0.8), (0.9, 1.0))


@dataclass(eq=False)
class SimInstance:
    """A generated dataset plus the withheld truth."""

    data: Dataset
    z: np.ndarray  # noiseless latent values, unwrapped
    k: np.ndarray  # wrap counts of the noisy latent (z + eps)
    eps: np.ndarray


def gen_lhs(n, bounds, rng):
    """Latin hypercube design: one uniform draw per equal-width stratum,
    shuffled."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng)
    lo, hi = bounds
    width = (hi - lo) / n
    pts = lo + (np.arange(n) + rng.random(n)) * width
    return rng.permutation(pts)


def _wrap_instance(x, z, eps):
    s = z + eps
    k = np.floor(s / TAU).astype(np.int64)
    y = wrap_angle(s)
    return SimInstance(Dataset(x, y), z, k, eps)


def gen_log(x, rng, noise_sd=0.5):
    """Scaled logarithmic response 15*log(1+x) with Gaussian noise added
    before wrapping; inputs must lie in [0, 2.5]."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > 2.5):
        raise ValueError("inputs must lie in [0, 2.5]")
    rng = np.random.default_rng(rng)
    z = 15.0 * np.log1p(x)
    eps = noise_sd * rng.standard_normal(x.size) if noise_sd > 0 else np.zeros(x.size)
    return _wrap_instance(x, z, eps)


def log_gap_allocation(n):
    """Largest-remainder allocation of n points over the gapped strata,
    proportional to stratum widths; ties broken by stratum index."""
    widths = np.array([hi - lo for lo, hi in LOG_GAP_STRATA])
    shares = n * widths / widths.sum()
    base = np.floor(shares).astype(int)
    rem = shares - base
    leftover = n - base.sum()
    order = np.lexsort((np.arange(len(base)), -rem))
    for i in order[:leftover]:
        base[i] += 1
    return tuple(int(b) for b in base)


def gen_log_gapped(n, rng, noise_sd=0.5):
    """Logarithmic data observed only on three strata of the unit-scaled
    input, leaving gaps at (0.15, 0.25) and (0.8, 0.9)."""
    if n < 20:
        raise ValueError("n must be >= 20")
    rng = np.random.default_rng(rng)
    sizes = log_gap_allocation(n)
    pieces = [
        gen_lhs(size, stratum, rng)
        for size, stratum in zip(sizes, LOG_GAP_STRATA)
        if size > 0
    ]
    u = np.concatenate(pieces)
    return gen_log(2.5 * u, rng, noise_sd=noise_sd)


def gen_wgp_instance(x, alpha, beta, theta, tau2, sigma2, nu, rng):
    """Draw one wrapped-GP instance: linear-mean GP latents, scaled
    Student-t noise, modulo wrap.  Returns the truth for oracle tests."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    x = x[order]
    rng = np.random.default_rng(rng)
    cov = build_cov(x, KernelParams(theta, tau2))
    z = mvn_draw(alpha + beta * x, cov, rng)
    eps = math.sqrt(sigma2) * rng.standard_t(nu, size=x.size)
    return _wrap_instance(x, z, eps)


@dataclass(eq=False)
class RfidData:
    """Grouped phase-frequency tests at known distances.

    Frequencies are in MHz; every test shares the same input scale bounds so
    fitted slopes are comparable across tests.  True slopes are recorded in
    radians per Hz and per scaled frequency unit.
    """

    datasets: list
    distances: np.ndarray
    slopes_hz: np.ndarray
    slopes_scaled: np.ndarray
    freq_mhz: np.ndarray


def slope_for_distance(distance):
    """Phase-frequency slope 4*pi*d/c implied by a tag distance, rad/Hz."""
    return 2.0 * TAU * distance / SPEED_OF_LIGHT


def gen_rfid_like(
    distances,
    rng,
    freq_mhz=None,
    censor_frac=0.15,
    wiggle_theta=0.05,
    wiggle_tau2=0.002,
    sigma2=0.01,
    nu=5.0,
    reads_per_channel=3,
):
    """Phase-frequency tests mimicking tag reads at the given distances.

    Per test: phase = (intercept + slope * freq + GP wiggle + t noise) mod
    tau, with the slope set by the distance.  A scan cycles through the
    channel table repeatedly, so each kept channel carries
    ``reads_per_channel`` replicate reads (noise independent per read).  A
    contiguous band of channels is censored per test when censor_frac > 0.
    """
    distances = np.asarray(distances, dtype=np.float64)
    if np.any(distances < 0.0):
        raise ValueError("distances must be nonnegative")
    rng = np.random.default_rng(rng)
    freq = RFID_FREQ_MHZ if freq_mhz is None else np.asarray(freq_mhz, dtype=np.float64)
    f_lo, f_hi = float(freq[0]), float(freq[-1])
    span_hz = (f_hi - f_lo) * 1e6
    u = (freq - f_lo) / (f_hi - f_lo)
    n_chan = freq.size
    n_censor = int(round(censor_frac * n_chan))
    datasets = []
    slopes_hz = slope_for_distance(distances)
    slopes_scaled = slopes_hz * span_hz
    reads = max(1, int(reads_per_channel))
    for i in range(distances.size):
        intercept = rng.uniform(0.0, TAU)
        wiggle = mvn_draw(
            np.zeros(n_chan),
            build_cov(u, KernelParams(wiggle_theta, wiggle_tau2)),
            rng,
        )
        clean = intercept + slopes_scaled[i] * u + wiggle
        eps = math.sqrt(sigma2) * rng.standard_t(nu, size=(reads, n_chan))
        phase = wrap_angle(np.repeat(clean[None, :], reads, axis=0) + eps)
        keep = np.ones(n_chan, dtype=bool)
        if n_censor > 0:
            start = int(rng.integers(0, n_chan - n_censor + 1))
            keep[start : start + n_censor] = False
        f_rep = np.tile(freq[keep], reads)
        datasets.append(
            Dataset(f_rep, phase[:, keep].ravel(), x_lo=f_lo, x_hi=f_hi)
        )
    return RfidData(datasets, distances, slopes_hz, slopes_scaled, freq.copy())
