"""Symbol families a(lam, x, y) with a declared regularity-loss exponent beta.

All built-in symbols are tensor products of one-dimensional factors, which
lets the quadrature factor separable integrals exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._smooth import BUMP_DERIV_SUP, bump1d
from .analysis import DecayFit, fit_decay
from .errors import TooFewPoints
from .phases import fd_partial, multi_indices


def _check_rough_beta(beta):
    if not (0.5 <= beta < 1.0):
        raise ValueError(f"beta must lie in [1/2, 1), got {beta}")
    return float(beta)


def _product_constants(axis_sups, max_order=4):
    """C_k = max over |gamma| = k of prod_j axis_sups[j][gamma_j]."""
    n = len(axis_sups)
    out = []
    for k in range(max_order + 1):
        best = 0.0
        for g in multi_indices(n, k):
            best = max(best, math.prod(axis_sups[j][g[j]] for j in range(n)))
        out.append(best)
    return tuple(out)


class SymbolModel:
    """Complex amplitude a(lam, x, y), zero outside ``support_box(lam)``."""

    name = "custom"
    beta = 0.0
    is_zero = False

    def __init__(self, dim):
        self.dim = int(dim)

    def factor(self, lam, j, s):
        """One-dimensional factor along axis j; product symbols only."""
        raise NotImplementedError

    def __call__(self, lam, x, y=None):
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1], dtype=complex)
        for j in range(self.dim):
            out = out * self.factor(lam, j, x[..., j])
        return out

    def eval(self, lam, x, y=None):
        return self(lam, x, y)

    def support_box(self, lam=1.0):
        raise NotImplementedError

    def freq_scale(self, lam):
        """Per-axis angular frequency (rad per unit x) the quadrature must resolve."""
        raise NotImplementedError

    def deriv_constants(self, lam=1.0):
        return ()

    def axis_factors(self, lam, y=None):
        return [(lambda s, j=j: self.factor(lam, j, np.asarray(s, dtype=float))) for j in range(self.dim)]

    def scaled(self, c):
        return ScaledSymbol(self, c)


class SmoothBump(SymbolModel):
    """Tensor product of exp(1 - 1/(1 - s^2)) scaled to half-width ``width``."""

    name = "smooth-bump"

    def __init__(self, center, width=1.0):
        if not width > 0:
            raise ValueError(f"width must be positive, got {width}")
        center = np.atleast_1d(np.asarray(center, dtype=float))
        super().__init__(center.size)
        self.center = center
        self.width = float(width)

    def factor(self, lam, j, s):
        return bump1d((s - self.center[j]) / self.width).astype(complex)

    def support_box(self, lam=1.0):
        return (self.center - self.width, self.center + self.width)

    def freq_scale(self, lam):
        return np.full(self.dim, 4.0 / self.width)

    def deriv_constants(self, lam=1.0):
        sups = [BUMP_DERIV_SUP[m] / self.width**m for m in range(5)]
        return _product_constants([sups] * self.dim)


class ChirpSymbol(SymbolModel):
    """exp(i lam^beta <omega, x>) times a smooth bump: each derivative costs lam^beta."""

    name = "chirp"

    def __init__(self, beta, omega, center=None, width=1.0):
        self.beta = _check_rough_beta(beta)
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        norm = np.linalg.norm(omega)
        if norm == 0:
            raise ValueError("omega must be nonzero")
        super().__init__(omega.size)
        self.omega = omega / norm
        self.envelope = SmoothBump(np.zeros(self.dim) if center is None else center, width)

    def factor(self, lam, j, s):
        return np.exp(1j * (lam**self.beta * self.omega[j]) * s) * self.envelope.factor(lam, j, s)

    def support_box(self, lam=1.0):
        return self.envelope.support_box(lam)

    def freq_scale(self, lam):
        return lam**self.beta * np.abs(self.omega) + self.envelope.freq_scale(lam)

    def deriv_constants(self, lam=1.0):
        # Leibniz with lam >= 1: |d^k a| <= lam^(beta k) sum_m binom(k, m) |omega|^(k-m) B_m
        w = self.envelope.width
        b = [BUMP_DERIV_SUP[m] / w**m for m in range(5)]
        per_axis = []
        for j in range(self.dim):
            om = abs(self.omega[j])
            per_axis.append([sum(math.comb(k, m) * om ** (k - m) * b[m] for m in range(k + 1)) for k in range(5)])
        return _product_constants(per_axis)


class ShrinkingBump(SymbolModel):
    """bump(lam^beta (x - center)): support radius lam^-beta."""

    name = "shrinking-bump"

    def __init__(self, beta, center):
        self.beta = _check_rough_beta(beta)
        center = np.atleast_1d(np.asarray(center, dtype=float))
        super().__init__(center.size)
        self.center = center

    def factor(self, lam, j, s):
        return bump1d(lam**self.beta * (s - self.center[j])).astype(complex)

    def support_box(self, lam=1.0):
        r = lam ** (-self.beta)
        return (self.center - r, self.center + r)

    def freq_scale(self, lam):
        return np.full(self.dim, 4.0 * lam**self.beta)

    def deriv_constants(self, lam=1.0):
        return _product_constants([list(BUMP_DERIV_SUP)] * self.dim)


class GaussianSymbol(SymbolModel):
    """exp(-|x|^2) truncated to the box |x_j| <= truncate."""

    name = "gaussian"

    def __init__(self, dim=1, truncate=8.0):
        super().__init__(dim)
        self.truncate = float(truncate)

    def factor(self, lam, j, s):
        return np.where(np.abs(s) <= self.truncate, np.exp(-s * s), 0.0).astype(complex)

    def support_box(self, lam=1.0):
        return (-np.full(self.dim, self.truncate), np.full(self.dim, self.truncate))

    def freq_scale(self, lam):
        return np.full(self.dim, 4.0)


class ZeroSymbol(SymbolModel):
    name = "zero"
    is_zero = True

    def factor(self, lam, j, s):
        return np.zeros(np.shape(s), dtype=complex)

    def support_box(self, lam=1.0):
        return (-np.ones(self.dim), np.ones(self.dim))

    def freq_scale(self, lam):
        return np.zeros(self.dim)


class ScaledSymbol(SymbolModel):
    """c * base for a complex constant c."""

    def __init__(self, base, c):
        super().__init__(base.dim)
        self.base = base
        self.c = complex(c)
        self.beta = base.beta
        self.name = base.name
        self.is_zero = base.is_zero or self.c == 0

    def factor(self, lam, j, s):
        f = self.base.factor(lam, j, s)
        return self.c * f if j == 0 else f

    def support_box(self, lam=1.0):
        return self.base.support_box(lam)

    def freq_scale(self, lam):
        return self.base.freq_scale(lam)

    def deriv_constants(self, lam=1.0):
        return tuple(abs(self.c) * c for c in self.base.deriv_constants(lam))


def make_smooth_bump(center, width=1.0):
    return SmoothBump(center, width)


def make_chirp_symbol(beta, omega, center=None, width=1.0):
    return ChirpSymbol(beta, omega, center=center, width=width)


def make_shrinking_bump(beta, center):
    return ShrinkingBump(beta, center)


def make_gaussian_symbol(dim=1, truncate=8.0):
    return GaussianSymbol(dim, truncate)


# regularity check --------------------------------------------------------


@dataclass
class RegularityReport:
    beta: float
    lambdas: list
    sups: dict  # order -> list of sup |D^gamma a| per lambda
    fits: dict  # order -> DecayFit
    slack: float = 0.1
    passed: bool = False
    per_order_pass: dict = field(default_factory=dict)

    def slopes(self):
        return {k: f.slope for k, f in self.fits.items()}


def _grid_points(lo, hi, n, per_axis):
    axes = [np.linspace(lo[j], hi[j], per_axis) for j in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def symbol_derivative_sup(symbol, lam, order, points_per_axis=None, y=None):
    """sup over a dense grid of the support of max_{|gamma| = order} |D^gamma a|."""
    n = symbol.dim
    if points_per_axis is None:
        points_per_axis = {1: 4001, 2: 201, 3: 41}.get(n, 21)
    lo, hi = symbol.support_box(lam)
    pts = _grid_points(lo, hi, n, points_per_axis)
    beta = symbol.beta
    h = 0.01 * lam ** (-beta) if beta > 0 else 0.01
    h = min(h, 0.01 * float(np.min(hi - lo)))
    best = 0.0
    for g in multi_indices(n, order):
        vals = np.abs(fd_partial(lambda p: symbol(lam, p, y), pts, g, h)) if order else np.abs(symbol(lam, pts, y))
        best = max(best, float(vals.max()))
    return best


def check_symbol_regularity(symbol, lam_grid, order=2, slack=0.1, points_per_axis=None):
    """Fit log sup|D^k a| against log lam for k = 1..order.

    Passes when every fitted slope is at most beta*k + slack.
    """
    lam_grid = [float(v) for v in lam_grid]
    if len(lam_grid) < 5:
        raise TooFewPoints(f"need at least 5 lambda values, got {len(lam_grid)}")
    if not 1 <= order <= 3:
        raise ValueError("order must be 1, 2 or 3")
    sups, fits, ok = {}, {}, {}
    for k in range(1, order + 1):
        sups[k] = [symbol_derivative_sup(symbol, lam, k, points_per_axis) for lam in lam_grid]
        fits[k] = fit_decay(list(zip(lam_grid, sups[k])))
        ok[k] = fits[k].slope <= symbol.beta * k + slack
    return RegularityReport(
        beta=symbol.beta,
        lambdas=lam_grid,
        sups=sups,
        fits=fits,
        slack=slack,
        passed=all(ok.values()),
        per_order_pass=ok,
    )


__all__ = [
    "SymbolModel",
    "SmoothBump",
    "ChirpSymbol",
    "ShrinkingBump",
    "GaussianSymbol",
    "ZeroSymbol",
    "ScaledSymbol",
    "make_smooth_bump",
    "make_chirp_symbol",
    "make_shrinking_bump",
    "make_gaussian_symbol",
    "check_symbol_regularity",
    "RegularityReport",
    "DecayFit",
]
