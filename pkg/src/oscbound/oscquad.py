"""Resolved panel quadrature for int exp(i lam phi(lam, x, y)) a(lam, x, y) dx.

Each axis of the integration box is cut into coarse cells; inside a cell the
Gauss-Legendre panel width is chosen so one local wavelength of the full
integrand (phase plus symbol oscillation) holds ``nodes_per_wavelength``
nodes.  Panels are halved until two successive levels agree.

When both phase and symbol split over the axes and no radial multiplier is
present, the tensor-product rule factors exactly into a product of 1-D rules,
which is what makes n = 2 affordable at lam ~ 1e6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from ._smooth import smooth_step
from .errors import BudgetExceeded, DimensionUnsupported
from .phases import _as_y, find_critical_point

TWO_PI = 2.0 * math.pi
CHUNK = 1 << 20
ROUNDOFF = 64 * np.finfo(float).eps
# lam * |phi| beyond this loses phase accuracy in double precision
PHASE_ACCURACY_CLIFF = 1e12


@dataclass
class QuadSpec:
    rel_tol: float = 1e-8
    panel_order: int = 16
    max_evals: int = 10**8
    domain: Optional[tuple] = None
    nodes_per_wavelength: float = 10.0
    coarse_cells: int = 16
    max_levels: int = 10
    factorize: bool = True  # use the exact 1-D factorization for separable integrands

    def __post_init__(self):
        if not (1e-14 < self.rel_tol < 1e-2):
            raise ValueError(f"rel_tol must lie in (1e-14, 1e-2), got {self.rel_tol}")
        if not (4 <= self.panel_order <= 64):
            raise ValueError(f"panel_order must lie in [4, 64], got {self.panel_order}")
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")


@dataclass
class QuadResult:
    value: complex
    err_estimate: float
    n_evals: int
    converged: bool
    levels: list = field(default_factory=list)
    l1: float = 0.0  # quadrature estimate of the integral of |integrand|

    @property
    def abs(self):
        return abs(self.value)

    @property
    def noise_floor(self):
        """Magnitude below which the value is indistinguishable from summation roundoff."""
        return ROUNDOFF * self.l1


@dataclass
class RadialCutoff:
    """|x - center|^(2 gamma) times chi(|x - center| / radius) or 1 - chi."""

    center: np.ndarray
    radius: float
    orientation: str = "inner"
    weight_power: float = 0.0

    def __post_init__(self):
        if self.orientation not in ("inner", "outer"):
            raise ValueError(f"orientation must be 'inner' or 'outer', got {self.orientation!r}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        self.center = np.atleast_1d(np.asarray(self.center, dtype=float))

    def __call__(self, x):
        d = np.sqrt(np.sum((x - self.center) ** 2, axis=-1))
        chi = smooth_step(d / self.radius)
        w = chi if self.orientation == "inner" else 1.0 - chi
        if self.weight_power:
            w = w * d ** (2.0 * self.weight_power)
        return w

    def breakpoints(self, j):
        c, r = self.center[j], self.radius
        return [c - 2 * r, c - r, c, c + r, c + 2 * r]

    @property
    def freq(self):
        return 8.0 / self.radius

    def box(self):
        if self.orientation == "inner":
            return (self.center - 2 * self.radius, self.center + 2 * self.radius)
        return None


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    xi, w = np.polynomial.legendre.leggauss(order)
    return (xi + 1.0) / 2.0, w / 2.0


def _intersect(a, b):
    lo = np.maximum(a[0], b[0])
    hi = np.minimum(a[1], b[1])
    return lo, hi


class _Axis:
    """Coarse cells along one axis with their level-0 panel counts."""

    def __init__(self, edges, panels):
        self.edges = edges
        self.panels = panels

    def count(self, level, order):
        return int(sum(self.panels)) * (2**level) * order

    def chunks(self, level, order):
        t, w = _gauss_legendre(order)
        per = max(1, CHUNK // order)
        for c0, c1, m0 in zip(self.edges[:-1], self.edges[1:], self.panels):
            m = m0 * 2**level
            hp = (c1 - c0) / m
            for p0 in range(0, m, per):
                p1 = min(m, p0 + per)
                starts = c0 + hp * np.arange(p0, p1)
                x = np.add.outer(starts, hp * t).ravel()
                yield x, np.tile(hp * w, p1 - p0)

    def nodes(self, level, order):
        xs, ws = zip(*self.chunks(level, order))
        return np.concatenate(xs), np.concatenate(ws)


def _axis_cells(lo, hi, breaks, n_coarse):
    pts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    h0 = (hi - lo) / n_coarse
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(math.ceil((b - a) / h0 - 1e-9)))
        edges.extend(a + (b - a) * np.arange(1, k + 1) / k)
    edges[-1] = hi
    return np.array(edges), h0


def _panel_counts(edges, h0, kfun, spec):
    counts = []
    for a, b in zip(edges[:-1], edges[1:]):
        k = kfun(a, b)
        h = h0 if k <= 0 else min(h0, TWO_PI / k * spec.panel_order / spec.nodes_per_wavelength)
        counts.append(max(1, int(math.ceil((b - a) / h - 1e-9))))
    return counts


def _phase_factor(lam, phi):
    return np.exp(1j * np.remainder(lam * phi, TWO_PI))


def _sum_chunks(parts):
    re = math.fsum(p.real for p in parts)
    im = math.fsum(p.imag for p in parts)
    return complex(re, im)


def integrate(phase, symbol, lam, y=None, spec=None, multiplier=None, strict=False):
    """Resolved quadrature of exp(i lam phi) a [times ``multiplier``] over the symbol support."""
    spec = spec or QuadSpec()
    n = phase.dim_x
    if n > 3:
        raise DimensionUnsupported(f"dimension {n} > 3")
    if symbol.dim != n:
        raise ValueError(f"symbol dimension {symbol.dim} != phase dimension {n}")
    y = _as_y(y, phase.dim_y)
    lam = float(lam)
    if symbol.is_zero:
        return QuadResult(0j, 0.0, 0, True, [0j])

    domain = phase.domain if spec.domain is None else _box_from(spec.domain, n)
    lo, hi = _intersect(symbol.support_box(lam), domain)
    if multiplier is not None and multiplier.box() is not None:
        lo, hi = _intersect((lo, hi), multiplier.box())
    if np.any(hi <= lo):
        return QuadResult(0j, 0.0, 0, True, [0j])

    freq = np.asarray(symbol.freq_scale(lam), dtype=float)
    if multiplier is not None:
        freq = freq + multiplier.freq
    terms = phase.axis_terms(lam, y)
    factors = symbol.axis_factors(lam, y)
    separable = terms is not None and factors is not None

    axes = []
    for j in range(n):
        breaks = multiplier.breakpoints(j) if multiplier is not None else []
        edges, h0 = _axis_cells(lo[j], hi[j], breaks, spec.coarse_cells)
        if separable:
            kfun = _separable_k(lam, terms[j], freq[j])
        else:
            kfun = _tensor_k(phase, lam, y, j, lo, hi, freq[j])
        axes.append(_Axis(edges, _panel_counts(edges, h0, kfun, spec)))

    order = spec.panel_order
    if separable and multiplier is None and spec.factorize:
        mode = "product"
    elif n == 1:
        mode = "line"
    else:
        mode = "tensor"

    def cost(level):
        counts = [ax.count(level, order) for ax in axes]
        return sum(counts) if mode == "product" else math.prod(counts)

    def level_value(level):
        if mode == "line":
            return _line_sum(phase, symbol, lam, y, axes[0], level, order, multiplier)
        if mode == "product":
            val, l1 = 1.0 + 0j, 1.0
            for j in range(n):
                v, a = _axis_sum(lam, terms[j], factors[j], axes[j], level, order)
                val *= v
                l1 *= a
            return val, l1
        return _tensor_sum(phase, symbol, lam, y, axes, level, order, multiplier)

    levels, n_evals = [], 0
    value, err, converged, l1 = complex("nan"), math.inf, False, 0.0
    for level in range(spec.max_levels + 1):
        c = cost(level)
        if n_evals + c > spec.max_evals:
            break
        q, l1 = level_value(level)
        n_evals += c
        levels.append(q)
        value = q
        if len(levels) >= 2:
            err = abs(levels[-1] - levels[-2])
            if err <= max(spec.rel_tol * max(abs(q), 1e-300), ROUNDOFF * l1):
                converged = True
                break
    result = QuadResult(value, err, n_evals, converged, levels, l1)
    if not converged and strict:
        raise BudgetExceeded(f"no convergence within {spec.max_evals} evaluations", result)
    return result


def _box_from(box, n):
    lo, hi = box
    return (
        np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy(),
        np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy(),
    )


def _separable_k(lam, term, freq):
    def kfun(a, b):
        s = np.linspace(a, b, 17)
        return 1.1 * lam * float(np.max(np.abs(term(s, 1)))) + freq

    return kfun


def _tensor_k(phase, lam, y, j, lo, hi, freq):
    n = phase.dim_x
    others = [np.linspace(lo[i], hi[i], 9) for i in range(n) if i != j]

    def kfun(a, b):
        axes = others[:j] + [np.linspace(a, b, 9)] + others[j:]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        g = phase.grad(lam, pts, y)[..., j]
        return 1.1 * lam * float(np.max(np.abs(g))) + freq

    return kfun


def _axis_sum(lam, term, factor, axis, level, order):
    parts, l1 = [], 0.0
    for x, w in axis.chunks(level, order):
        f = w * _phase_factor(lam, term(x, 0)) * factor(x)
        parts.append(np.sum(f))
        l1 += float(np.sum(np.abs(f)))
    return _sum_chunks(parts), l1


def _line_sum(phase, symbol, lam, y, axis, level, order, multiplier):
    parts, l1 = [], 0.0
    for x, w in axis.chunks(level, order):
        pts = x[:, None]
        f = symbol(lam, pts, y)
        if multiplier is not None:
            f = f * multiplier(pts)
        f = w * _phase_factor(lam, phase.value(lam, pts, y)) * f
        parts.append(np.sum(f))
        l1 += float(np.sum(np.abs(f)))
    return _sum_chunks(parts), l1


def _tensor_sum(phase, symbol, lam, y, axes, level, order, multiplier):
    n = len(axes)
    nodes = [ax.nodes(level, order) for ax in axes]
    block = max(1, int(CHUNK ** (1.0 / n)))
    parts, l1 = [], 0.0
    ranges = [range(0, len(x), block) for x, _ in nodes]
    for starts in np.ndindex(*[len(r) for r in ranges]):
        sub_x, sub_w = [], []
        for j, s in enumerate(starts):
            x, w = nodes[j]
            i0 = ranges[j][s]
            sub_x.append(x[i0 : i0 + block])
            sub_w.append(w[i0 : i0 + block])
        mesh = np.meshgrid(*sub_x, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        wmesh = np.meshgrid(*sub_w, indexing="ij")
        wts = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
        f = symbol(lam, pts, y)
        if multiplier is not None:
            f = f * multiplier(pts)
        f = wts * _phase_factor(lam, phase.value(lam, pts, y)) * f
        parts.append(np.sum(f))
        l1 += float(np.sum(np.abs(f)))
    return _sum_chunks(parts), l1


@dataclass
class Cutoff:
    """Radial cutoff chi(mu lam^alpha |x - x(y)|) (``inner``) or its complement (``outer``)."""

    alpha: float
    orientation: str = "outer"
    mu: Optional[float] = None
    center: Optional[np.ndarray] = None


def cutoff_multiplier(phase, lam, y, cutoff, weight_power=0.0):
    if cutoff.center is None or cutoff.mu is None:
        cp = find_critical_point(phase, lam, y)
        center = cp.location if cutoff.center is None else cutoff.center
        mu = cp.mu if cutoff.mu is None else cutoff.mu
    else:
        center, mu = cutoff.center, cutoff.mu
    radius = 1.0 / (mu * lam**cutoff.alpha)
    return RadialCutoff(center, radius, cutoff.orientation, weight_power)


def integrate_weighted(phase, symbol, lam, y, weight_power, cutoff, spec=None, strict=False):
    """Quadrature of |x - x(y)|^(2 gamma) chi-cutoff times the integrand."""
    if weight_power < 1:
        raise ValueError(f"weight_power must be >= 1, got {weight_power}")
    mult = cutoff_multiplier(phase, lam, y, cutoff, weight_power)
    return integrate(phase, symbol, lam, y, spec, multiplier=mult, strict=strict)
