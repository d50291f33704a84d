"""Phase functions phi(lam, x, y) and critical-point location.

Built-in phases are sums of one-dimensional terms, so every mixed partial
derivative vanishes and each axis term carries analytic derivatives up to
order 4.  User phases wrap a plain callable and get their derivatives from
central finite differences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, SingularHessian

MAX_DERIV_ORDER = 4

# central difference stencils: order -> (offsets, coefficients)
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def fd_step(order):
    """Finite-difference step used for user phases at a given total order."""
    return 1e-4 if order <= 2 else 1e-3


def fd_partial(f, x, gamma, h):
    """Partial derivative d^gamma f at points x (shape (..., n)) by tensor stencils."""
    x = np.asarray(x, dtype=float)
    per_axis = [_STENCILS[g] for g in gamma]
    total = 0.0
    for combo in itertools.product(*[range(len(off)) for off, _ in per_axis]):
        shift = np.zeros(x.shape[-1])
        coef = 1.0
        for j, idx in enumerate(combo):
            off, cs = per_axis[j]
            shift[j] = off[idx] * h
            coef *= cs[idx]
        total = total + coef * f(x + shift)
    return total / h ** sum(gamma)


def multi_indices(n, order):
    """All multi-indices of length n and total order ``order``."""
    return [g for g in itertools.product(range(order + 1), repeat=n) if sum(g) == order]


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != n:
        raise ValueError(f"expected points with last axis {n}, got shape {x.shape}")
    return x


def _as_y(y, d):
    if d == 0:
        return np.zeros(0)
    if y is None:
        return np.zeros(d)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (d,):
        raise ValueError(f"expected y of length {d}, got shape {y.shape}")
    return y


class PhaseModel:
    """Real phase phi(lam, x, y) on a box in x.

    Subclasses override ``value`` and, when they can, the analytic derivative
    hooks; the defaults fall back to central finite differences.
    """

    name = "custom"

    def __init__(self, dim_x, dim_y=None, param_t=None, domain=None, y_domain=None):
        if dim_x < 1:
            raise ValueError("dim_x must be positive")
        self.dim_x = int(dim_x)
        self.dim_y = self.dim_x if dim_y is None else int(dim_y)
        self.param_t = param_t
        self.domain = _box(domain, self.dim_x)
        self.y_domain = _box(y_domain, self.dim_y)

    # evaluation ------------------------------------------------------------
    def value(self, lam, x, y=None):
        raise NotImplementedError

    def eval(self, lam, x, y=None):
        return self.value(lam, x, y)

    def derivative(self, lam, x, y, gamma):
        """d^gamma phi (real partials; D^gamma differs only by a unimodular factor)."""
        gamma = tuple(int(g) for g in gamma)
        if len(gamma) != self.dim_x or min(gamma) < 0 or sum(gamma) > MAX_DERIV_ORDER:
            raise ValueError(f"bad multi-index {gamma}")
        x = _as_points(x, self.dim_x)
        y = _as_y(y, self.dim_y)
        return fd_partial(lambda p: self.value(lam, p, y), x, gamma, fd_step(sum(gamma)))

    def grad(self, lam, x, y=None):
        x = _as_points(x, self.dim_x)
        cols = []
        for j in range(self.dim_x):
            g = [0] * self.dim_x
            g[j] = 1
            cols.append(self.derivative(lam, x, y, g))
        return np.stack(cols, axis=-1)

    def hessian(self, lam, x, y=None):
        x = _as_points(x, self.dim_x)
        n = self.dim_x
        H = np.empty(x.shape[:-1] + (n, n))
        for i in range(n):
            for j in range(i, n):
                g = [0] * n
                g[i] += 1
                g[j] += 1
                H[..., i, j] = H[..., j, i] = self.derivative(lam, x, y, g)
        return H

    # structure -------------------------------------------------------------
    def scale(self, lam, y=None):
        """Declared scale mu(lam, y), or None when it must be estimated."""
        return None

    def start_point(self, lam, y=None):
        y = _as_y(y, self.dim_y)
        if self.param_t is not None and self.dim_y == self.dim_x:
            return np.clip(y / (2.0 * self.param_t), self.domain[0], self.domain[1])
        return 0.5 * (self.domain[0] + self.domain[1])

    def axis_terms(self, lam, y=None):
        """Per-axis callables (s, k) -> d^k phi_j(s) if phi = sum_j phi_j(x_j), else None."""
        return None

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, dim_x={self.dim_x})"


def _box(box, n):
    if box is None:
        return (-np.ones(n), np.ones(n))
    lo, hi = box
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
    if np.any(hi <= lo):
        raise ValueError("empty box")
    return (lo, hi)


class CallablePhase(PhaseModel):
    """Wraps ``func(lam, x, y)`` with x of shape (..., n); derivatives by finite differences."""

    def __init__(self, func, dim_x, dim_y=None, mu=None, **kwargs):
        super().__init__(dim_x, dim_y, **kwargs)
        self._func = func
        self._mu = mu

    def value(self, lam, x, y=None):
        x = _as_points(x, self.dim_x)
        y = _as_y(y, self.dim_y)
        return np.broadcast_to(np.asarray(self._func(lam, x, y), dtype=float), x.shape[:-1])

    def scale(self, lam, y=None):
        if self._mu is None:
            return None
        return float(self._mu(lam, y)) if callable(self._mu) else float(self._mu)


class SeparablePhase(PhaseModel):
    """phi(lam, x, y) = sum_j f_j(lam, x_j, y) with analytic axis derivatives."""

    def axis_derivative(self, lam, j, s, y, k):
        raise NotImplementedError

    def value(self, lam, x, y=None):
        x = _as_points(x, self.dim_x)
        y = _as_y(y, self.dim_y)
        return sum(self.axis_derivative(lam, j, x[..., j], y, 0) for j in range(self.dim_x))

    def derivative(self, lam, x, y, gamma):
        gamma = tuple(int(g) for g in gamma)
        if len(gamma) != self.dim_x or min(gamma) < 0 or sum(gamma) > MAX_DERIV_ORDER:
            raise ValueError(f"bad multi-index {gamma}")
        x = _as_points(x, self.dim_x)
        y = _as_y(y, self.dim_y)
        active = [j for j, g in enumerate(gamma) if g]
        if not active:
            return self.value(lam, x, y)
        if len(active) > 1:
            return np.zeros(x.shape[:-1])
        j = active[0]
        return np.asarray(self.axis_derivative(lam, j, x[..., j], y, gamma[j]), dtype=float) + np.zeros(
            x.shape[:-1]
        )

    def grad(self, lam, x, y=None):
        x = _as_points(x, self.dim_x)
        y = _as_y(y, self.dim_y)
        return np.stack(
            [self.axis_derivative(lam, j, x[..., j], y, 1) + 0.0 * x[..., j] for j in range(self.dim_x)],
            axis=-1,
        )

    def hessian(self, lam, x, y=None):
        x = _as_points(x, self.dim_x)
        y = _as_y(y, self.dim_y)
        diag = np.stack(
            [self.axis_derivative(lam, j, x[..., j], y, 2) + 0.0 * x[..., j] for j in range(self.dim_x)],
            axis=-1,
        )
        H = np.zeros(x.shape[:-1] + (self.dim_x, self.dim_x))
        idx = np.arange(self.dim_x)
        H[..., idx, idx] = diag
        return H

    def axis_terms(self, lam, y=None):
        y = _as_y(y, self.dim_y)
        return [
            (lambda s, k=0, j=j: self.axis_derivative(lam, j, np.asarray(s, dtype=float), y, k))
            for j in range(self.dim_x)
        ]


def _poly(coeffs, s):
    # ascending powers: coeffs[0] + coeffs[1] s + ...
    return float(np.polynomial.polynomial.polyval(s, coeffs)) if len(coeffs) else 0.0


class QuadraticPhase(SeparablePhase):
    """t (1 + q(1/lam)) |x|^2 - <y, x>."""

    def __init__(self, t, q_coeffs=(), dim=1, lam_range=(1.0, 1e12), name="schrodinger", **kwargs):
        if not t > 0:
            raise ValueError(f"t must be positive, got {t}")
        super().__init__(dim, dim, param_t=float(t), **kwargs)
        self.name = name
        self.q_coeffs = tuple(float(c) for c in q_coeffs)
        self.lam_range = (float(lam_range[0]), float(lam_range[1]))
        if self.q_coeffs:
            _check_positive_factor(self.q_coeffs, self.lam_range)

    def curvature(self, lam):
        return self.param_t * (1.0 + _poly(self.q_coeffs, 1.0 / lam))

    def axis_derivative(self, lam, j, s, y, k):
        c = self.curvature(lam)
        if k == 0:
            return c * s * s - y[j] * s
        if k == 1:
            return 2.0 * c * s - y[j]
        if k == 2:
            return 2.0 * c + 0.0 * s
        return 0.0 * s

    def scale(self, lam, y=None):
        return self.curvature(lam)

    def start_point(self, lam, y=None):
        y = _as_y(y, self.dim_y)
        return y / (2.0 * self.curvature(lam))

    def critical_point_exact(self, lam, y):
        return _as_y(y, self.dim_y) / (2.0 * self.curvature(lam))


def _check_positive_factor(coeffs, lam_range):
    s_lo, s_hi = 1.0 / lam_range[1], 1.0 / lam_range[0]
    factor = np.polynomial.polynomial.Polynomial(coeffs) + 1.0
    bad = factor(s_lo) <= 0 or factor(s_hi) <= 0
    for r in factor.roots():
        if abs(r.imag) < 1e-12 and s_lo <= r.real <= s_hi:
            bad = True
    if bad:
        raise ValueError(f"1 + q(1/lam) must stay positive on lam in {lam_range}")


class PsiPerturbedPhase(SeparablePhase):
    """t |x|^2 - <y, x> + lam^-2 psi(lam x), psi(x) = sum_j psi1(x_j)."""

    name = "nonexample-psi"

    def __init__(self, t, psi=None, psi_derivs=None, dim=1, **kwargs):
        if not t > 0:
            raise ValueError(f"t must be positive, got {t}")
        super().__init__(dim, dim, param_t=float(t), **kwargs)
        if psi is None:
            self._psi = [np.sin, np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u), np.sin]
        else:
            derivs = list(psi_derivs) if psi_derivs is not None else []
            self._psi = [psi] + derivs
            for k in range(len(self._psi), MAX_DERIV_ORDER + 1):
                self._psi.append(_fd_1d(psi, k))

    def axis_derivative(self, lam, j, s, y, k):
        t = self.param_t
        pert = lam ** (k - 2.0) * self._psi[k](lam * s)
        if k == 0:
            return t * s * s - y[j] * s + pert
        if k == 1:
            return 2.0 * t * s - y[j] + pert
        if k == 2:
            return 2.0 * t + pert
        return pert + 0.0 * s

    def scale(self, lam, y=None):
        return self.param_t


def _fd_1d(f, k):
    off, cs = _STENCILS[k]
    h = fd_step(k)

    def deriv(u):
        u = np.asarray(u, dtype=float)
        return sum(c * f(u + o * h) for o, c in zip(off, cs)) / h**k

    return deriv


class CubicPhase(SeparablePhase):
    """t (x_1^3 + |x'|^2) - <y, x>."""

    name = "nonexample-cubic"

    def __init__(self, t, dim=1, **kwargs):
        if not t > 0:
            raise ValueError(f"t must be positive, got {t}")
        super().__init__(dim, dim, param_t=float(t), **kwargs)

    def axis_derivative(self, lam, j, s, y, k):
        t = self.param_t
        if j == 0:
            return (t * s**3 - y[0] * s, 3 * t * s * s - y[0], 6 * t * s, 6 * t + 0.0 * s, 0.0 * s)[k]
        return (t * s * s - y[j] * s, 2 * t * s - y[j], 2 * t + 0.0 * s, 0.0 * s, 0.0 * s)[k]

    def scale(self, lam, y=None):
        return self.param_t


def make_schrodinger_phase(t, dim=1, **kwargs):
    """t|x|^2 - <y, x>; critical point y/(2t), scale mu = t."""
    return QuadraticPhase(t, (), dim=dim, name="schrodinger", **kwargs)


def make_perturbed_phase(t, q_coeffs, dim=1, lam_range=(1.0, 1e12), **kwargs):
    """t(1 + q(1/lam))|x|^2 - <y, x> with q given by ascending coefficients."""
    return QuadraticPhase(t, q_coeffs, dim=dim, lam_range=lam_range, name="perturbed", **kwargs)


def make_nonexample_psi(t, psi=None, dim=1, psi_derivs=None, **kwargs):
    return PsiPerturbedPhase(t, psi=psi, psi_derivs=psi_derivs, dim=dim, **kwargs)


def make_nonexample_cubic(t, dim=1, **kwargs):
    return CubicPhase(t, dim=dim, **kwargs)


@dataclass
class CriticalPoint:
    location: np.ndarray
    gradient_norm: float
    hessian: np.ndarray
    hessian_det: float
    mu: float
    value: float = 0.0
    iterations: int = 0


def estimate_scale(phase, lam, y, hessian):
    mu = phase.scale(lam, y)
    if mu is not None:
        return float(mu)
    return float(abs(np.linalg.det(hessian)) ** (1.0 / phase.dim_x))


def find_critical_point(phase, lam, y=None, x0=None, max_iter=50, tol=1e-10, det_floor=1e-14):
    """Newton iteration for grad_x phi = 0; stops when |grad| <= tol * mu."""
    y = _as_y(y, phase.dim_y)
    x = np.array(phase.start_point(lam, y) if x0 is None else x0, dtype=float).reshape(phase.dim_x)
    for it in range(max_iter + 1):
        g = phase.grad(lam, x, y)
        H = phase.hessian(lam, x, y)
        H = 0.5 * (H + H.T)
        mu = estimate_scale(phase, lam, y, H)
        gnorm = float(np.linalg.norm(g))
        if not np.all(np.isfinite(x)) or not np.isfinite(gnorm):
            break
        if gnorm <= tol * mu:
            det = float(np.linalg.det(H))
            return CriticalPoint(
                location=x,
                gradient_norm=gnorm,
                hessian=H,
                hessian_det=det,
                mu=mu,
                value=float(phase.value(lam, x, y)),
                iterations=it,
            )
        if it == max_iter:
            break
        det = float(np.linalg.det(H))
        if abs(det) < det_floor:
            raise SingularHessian(f"|det Hess| = {abs(det):.3g} at x = {x} (iteration {it})")
        x = x - np.linalg.solve(H, g)
    raise NoConvergence(f"Newton did not converge in {max_iter} iterations (last x = {x})")


def hessian_signature(hessian, mu, rel=1e-10):
    ev = np.linalg.eigvalsh(hessian)
    thr = rel * mu
    return int(np.sum(ev > thr) - np.sum(ev < -thr))
