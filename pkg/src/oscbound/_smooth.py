"""Compactly supported smooth profiles shared by symbols and cutoffs."""

import numpy as np


def bump1d(s):
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; peak value 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


# sup |d^k/ds^k bump1d| for k = 0..4, from a 2e6-point grid of the exact
# derivatives (see tests/test_smooth.py for the oracle).
BUMP_DERIV_SUP = (1.0, 2.1703570857, 21.065882119, 506.68751879, 22604.932848)

# integral of bump1d over the real line
BUMP_INTEGRAL = 1.2069003224378762


def _edge(u):
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(r):
    """C-infinity cutoff: 1 for r <= 1, 0 for r >= 2, monotone in between."""
    r = np.asarray(r, dtype=float)
    a = _edge(2.0 - r)
    b = _edge(r - 1.0)
    out = np.ones_like(r)
    mid = (r > 1.0) & (r < 2.0)
    out[mid] = a[mid] / (a[mid] + b[mid])
    out[r >= 2.0] = 0.0
    return out
