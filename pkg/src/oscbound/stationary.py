"""Stationary-phase prediction, b(lam, y) extraction, y-derivatives of b,
Van der Corput splitting and the local quadratic-form residual."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RadiusExceedsDomain, SingularHessian, StencilOutOfDomain
from .oscquad import QuadResult, QuadSpec, RadialCutoff, integrate
from .phases import _as_y, find_critical_point, hessian_signature


class QuadratureNoiseWarning(UserWarning):
    """Finite-difference stencil differences are comparable to quadrature error."""


def leading_order(phase, symbol, lam, y=None, cp=None):
    """j = 0 stationary-phase term.

    e^{i lam phi(x_c)} (2 pi / lam)^{n/2} |det H|^{-1/2} e^{i pi sgn(H) / 4} a(x_c)
    """
    y = _as_y(y, phase.dim_y)
    cp = cp or find_critical_point(phase, lam, y)
    n = phase.dim_x
    det = abs(cp.hessian_det)
    if det < 1e-14:
        raise SingularHessian(f"|det Hess| = {det:.3g} at the critical point")
    sig = hessian_signature(cp.hessian, cp.mu)
    amp = complex(symbol(lam, cp.location[None, :], y)[0])
    if amp == 0:
        return 0j
    return (
        np.exp(1j * math.remainder(lam * cp.value, 2 * math.pi))
        * (2 * math.pi / lam) ** (n / 2)
        / math.sqrt(det)
        * np.exp(1j * math.pi * sig / 4)
        * amp
    )


@dataclass
class BSample:
    lam: float
    y: np.ndarray
    b_value: complex
    mu: float
    quad: QuadResult

    @property
    def magnitude(self):
        return abs(self.b_value)


def extract_b(phase, symbol, lam, y=None, spec=None, cp=None):
    """b(lam, y) = e^{-i lam phi(x(y), y)} I(lam, y)."""
    y = _as_y(y, phase.dim_y)
    cp = cp or find_critical_point(phase, lam, y)
    res = integrate(phase, symbol, lam, y, spec)
    b = res.value * np.exp(-1j * math.remainder(lam * cp.value, 2 * math.pi))
    return BSample(float(lam), y, complex(b), cp.mu, res)


@dataclass
class BDerivative:
    value: complex
    step: float
    noisy: bool
    samples: list


def _stencil(gamma):
    """Offsets (in units of h) and weights for central differences of total order <= 2."""
    active = [(k, g) for k, g in enumerate(gamma) if g]
    if not active:
        return [((), 1.0)]
    if len(active) == 1 and active[0][1] == 1:
        k = active[0][0]
        return [(((k, 1),), 0.5), (((k, -1),), -0.5)]
    if len(active) == 1 and active[0][1] == 2:
        k = active[0][0]
        return [(((k, 1),), 1.0), ((), -2.0), (((k, -1),), 1.0)]
    if len(active) == 2 and all(g == 1 for _, g in active):
        (i, _), (j, _) = active
        return [
            (((i, 1), (j, 1)), 0.25),
            (((i, 1), (j, -1)), -0.25),
            (((i, -1), (j, 1)), -0.25),
            (((i, -1), (j, -1)), 0.25),
        ]
    raise ValueError(f"|gamma| must be <= 2, got {gamma}")


def b_derivative_sample(phase, symbol, lam, y, gamma, spec=None, step=None):
    y = _as_y(y, phase.dim_y)
    gamma = tuple(int(g) for g in gamma)
    if len(gamma) != phase.dim_y:
        raise ValueError(f"multi-index length {len(gamma)} != dim_y {phase.dim_y}")
    order = sum(gamma)
    if order == 0:
        s = extract_b(phase, symbol, lam, y, spec)
        return BDerivative(s.b_value, 0.0, False, [s])
    beta = symbol.beta
    h = step if step is not None else 0.05 * lam ** (-beta)
    lo, hi = phase.y_domain
    terms = _stencil(gamma)
    samples, total, err = [], 0j, 0.0
    vals = []
    for offsets, weight in terms:
        yy = y.copy()
        for k, sgn in offsets:
            yy[k] += sgn * h
        if np.any(yy < lo) or np.any(yy > hi):
            raise StencilOutOfDomain(f"stencil point {yy} leaves the y domain")
        s = extract_b(phase, symbol, lam, yy, spec)
        samples.append(s)
        vals.append(s.b_value)
        total += weight * s.b_value
        err = max(err, s.quad.err_estimate)
    spread = max(abs(v - vals[0]) for v in vals[1:]) if len(vals) > 1 else math.inf
    noisy = spread < 1e3 * err
    if noisy:
        warnings.warn(
            f"stencil differences {spread:.3g} below 1e3 x quadrature error {err:.3g}", QuadratureNoiseWarning
        )
    # D^gamma = (1/i)^|gamma| d^gamma
    value = (-1j) ** order * total / h**order
    return BDerivative(complex(value), h, noisy, samples)


def b_derivative(phase, symbol, lam, y, gamma, spec=None, step=None):
    """Central-difference estimate of D_y^gamma b with step 0.05 lam^-beta."""
    return b_derivative_sample(phase, symbol, lam, y, gamma, spec, step).value


@dataclass
class SplitResult:
    alpha: float
    inner: QuadResult
    outer: QuadResult
    excision_radius: float
    whole: QuadResult = None

    @property
    def partition_error(self):
        ref = self.whole.value
        return abs(self.inner.value + self.outer.value - ref) / max(abs(ref), 1e-300)


def vdc_split(phase, symbol, lam, y=None, alpha=0.5, spec=None, mu=None, check_alpha=True):
    """Split I = I1 + I2 with a smooth cutoff of radius mu^-1 lam^-alpha about x(y)."""
    y = _as_y(y, phase.dim_y)
    if check_alpha and not (0 < alpha <= 1 - symbol.beta + 1e-12):
        raise ValueError(f"alpha must lie in (0, 1 - beta] = (0, {1 - symbol.beta}], got {alpha}")
    spec = spec or QuadSpec()
    cp = find_critical_point(phase, lam, y)
    mu = cp.mu if mu is None else mu
    r = 1.0 / (mu * lam**alpha)
    lo, hi = phase.domain if spec.domain is None else spec.domain
    lo = np.broadcast_to(lo, cp.location.shape)
    hi = np.broadcast_to(hi, cp.location.shape)
    if np.any(cp.location - r < lo) or np.any(cp.location + r > hi):
        raise RadiusExceedsDomain(f"excision ball of radius {r:.3g} about {cp.location} leaves the domain")
    inner = integrate(phase, symbol, lam, y, spec, multiplier=RadialCutoff(cp.location, r, "inner"))
    outer = integrate(phase, symbol, lam, y, spec, multiplier=RadialCutoff(cp.location, r, "outer"))
    whole = integrate(phase, symbol, lam, y, spec)
    return SplitResult(alpha, inner, outer, r, whole)


def _sphere_directions(n, count):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    # Fibonacci sphere
    k = np.arange(count) + 0.5
    z = 1 - 2 * k / count
    rho = np.sqrt(1 - z * z)
    th = np.pi * (1 + 5**0.5) * k
    return np.stack([rho * np.cos(th), rho * np.sin(th), z], axis=-1)


def local_form_residual(phase, lam, y=None, sample_radius=0.5, n_radii=25, n_dirs=32, min_radius_frac=1e-4):
    """max |phi~ - (1/2) d^T H d| / (mu |d|^3) over spheres |d| = r <= sample_radius.

    phi~ = phi(x) - phi(x(y)) and H = Hess phi at x(y); the gradient term at
    the computed root is subtracted too, which removes solver residue.  Each
    sample's discrepancy is reduced by its own rounding level, so an exactly
    quadratic phase reports 0.
    """
    y = _as_y(y, phase.dim_y)
    cp = find_critical_point(phase, lam, y)
    g0 = phase.grad(lam, cp.location, y)
    radii = sample_radius * np.geomspace(min_radius_frac, 1.0, n_radii)
    dirs = _sphere_directions(phase.dim_x, n_dirs)
    d = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, phase.dim_x)
    x = cp.location + d
    lo, hi = phase.domain
    keep = np.all((x >= lo) & (x <= hi), axis=-1)
    d, x = d[keep], x[keep]
    if not len(d):
        return 0.0
    phi = phase.value(lam, x, y)
    tilde = phi - cp.value
    quad = 0.5 * np.einsum("ki,ij,kj->k", d, cp.hessian, d)
    lin = d @ g0
    noise = 8 * np.finfo(float).eps * (np.abs(phi) + abs(cp.value) + np.abs(quad) + np.abs(lin))
    excess = np.maximum(np.abs(tilde - lin - quad) - noise, 0.0)
    rr = np.linalg.norm(d, axis=-1)
    return float(np.max(excess / (cp.mu * rr**3)))
