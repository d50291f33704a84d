"""Log-log exponent fits and minimal bound constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import TooFewPoints, ZeroBound

MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    discarded: int

    def predict(self, x):
        return math.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope

    def as_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "discarded": self.discarded,
        }


def _loglog_ols(x, m):
    lx = np.log(x)
    lm = np.log(m)
    xm = lx.mean()
    ym = lm.mean()
    sxx = float(np.sum((lx - xm) ** 2))
    slope = float(np.sum((lx - xm) * (lm - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = lm - (intercept + slope * lx)
    ss_tot = float(np.sum((lm - ym) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot <= 1e-300:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return slope, intercept, r2


def fit_decay(samples, discard_decade=True):
    """Least-squares slope of log(magnitude) against log(lam).

    Samples are (lam, magnitude) pairs in any order.  Zero magnitudes are
    dropped and counted in ``discarded``; so are points in the smallest
    decade of lam (lam < 10 * lam_min) unless ``discard_decade`` is False.
    """
    pts = sorted((float(l), float(m)) for l, m in samples)
    lams = [p[0] for p in pts]
    if any(l <= 0 for l in lams):
        raise ValueError("lambda values must be positive")
    if len(set(lams)) != len(lams):
        raise ValueError("lambda values must be distinct")
    if any(m < 0 or not math.isfinite(m) for _, m in pts):
        raise ValueError("magnitudes must be finite and non-negative")
    discarded = 0
    if pts and discard_decade:
        cut = 10.0 * pts[0][0] * (1 - 1e-12)
        kept = [p for p in pts if p[0] >= cut]
        discarded += len(pts) - len(kept)
        pts = kept
    nonzero = [p for p in pts if p[1] > 0]
    discarded += len(pts) - len(nonzero)
    if len(nonzero) < MIN_FIT_POINTS:
        raise TooFewPoints(f"{len(nonzero)} usable points after discarding {discarded}; need {MIN_FIT_POINTS}")
    x = np.array([p[0] for p in nonzero])
    m = np.array([p[1] for p in nonzero])
    slope, intercept, r2 = _loglog_ols(x, m)
    return DecayFit(slope=slope, intercept=intercept, r_squared=r2, n_points=len(nonzero), discarded=discarded)


def mu_scaling_fit(samples):
    """Slope of log magnitude against log mu over the whole t range (no decade discard)."""
    return fit_decay(samples, discard_decade=False)


@dataclass
class BoundCheck:
    constant: float
    worst_point: Any
    passed: bool
    cap: float
    ratios: list

    @property
    def pass_(self):
        return self.passed

    def as_dict(self):
        return {"constant": self.constant, "worst_point": self.worst_point, "pass": self.passed, "cap": self.cap}


def check_bound(samples: Sequence, bound: Callable[[Any], float], cap=math.inf):
    """Minimal C with magnitude <= C * bound(inputs) at every sample."""
    ratios = []
    worst, best = None, -1.0
    for inputs, mag in samples:
        b = float(bound(inputs))
        if not b > 0:
            raise ZeroBound(f"bound is {b} at {inputs!r}")
        r = float(mag) / b
        ratios.append(r)
        if r > best:
            best, worst = r, inputs
    constant = max(best, 0.0) if ratios else 0.0
    return BoundCheck(constant=constant, worst_point=worst, passed=constant <= cap, cap=cap, ratios=ratios)


# bound formulas -------------------------------------------------------------


def theorem_bound(lam, mu, n, beta, order=0, dx_sup=1.0):
    """mu^-n lam^(-n(1-beta)) lam^(beta |gamma|) sup|D^sigma x(y)|^|sigma|."""
    return mu ** (-n) * lam ** (-n * (1.0 - beta)) * lam ** (beta * order) * dx_sup


def annulus_bound(lam, mu, n, beta, alpha, gamma, N):
    """(mu^-1 lam^-alpha)^(n + 2 gamma) lam^(-N(1 - beta - alpha))."""
    return (lam ** (-alpha) / mu) ** (n + 2 * gamma) * lam ** (-N * (1.0 - beta - alpha))


def annulus_exponent(n, beta, alpha, gamma, N):
    return -(alpha * (n + 2 * gamma) + N * (1.0 - beta - alpha))
