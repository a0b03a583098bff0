"""Small shared helpers."""

import math

import numpy as np

TAU = math.tau


def wrap_angle(a):
    """Map angles to [0, tau).  Guards the float edge case where np.mod
    returns exactly tau for tiny negative inputs."""
    r = np.mod(a, TAU)
    if np.isscalar(r) or r.ndim == 0:
        return float(r) if r < TAU else 0.0
    r[r >= TAU] -= TAU
    return r
