"""Grid-based check of the three "non-degenerate critical point to scale mu" conditions."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NoConvergence, SingularHessian
from .phases import MAX_DERIV_ORDER, _as_y, estimate_scale, find_critical_point, multi_indices
from .stationary import _sphere_directions


@dataclass
class Thresholds:
    gradient_factor: float = 0.1  # pass_1: measured >= gradient_factor * epsilon
    hessian_min: float = 0.01
    derivs_max: float = 100.0
    max_order: int = MAX_DERIV_ORDER


@dataclass
class Condition:
    measured: float
    passed: bool
    threshold: float

    def as_dict(self):
        return {"measured": self.measured, "pass": self.passed, "threshold": self.threshold}


@dataclass
class ValidationReport:
    epsilon: float
    lam: float
    y: list
    mu: float
    critical_point: list
    cond_gradient: Condition
    cond_hessian: Condition
    cond_derivs: Condition
    thresholds: Thresholds
    warnings: list = field(default_factory=list)
    grid_density: int = 0

    @property
    def passed(self):
        return self.cond_gradient.passed and self.cond_hessian.passed and self.cond_derivs.passed

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "y": self.y,
            "mu": self.mu,
            "critical_point": self.critical_point,
            "grid_density": self.grid_density,
            "cond_gradient": self.cond_gradient.as_dict(),
            "cond_hessian": self.cond_hessian.as_dict(),
            "cond_derivs": self.cond_derivs.as_dict(),
            "thresholds": asdict(self.thresholds),
            "pass": self.passed,
            "warnings": list(self.warnings),
        }


def _grid(lo, hi, density):
    axes = [np.linspace(lo[j], hi[j], density) for j in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _start_points(lo, hi, count=8):
    """Box corners (pulled in by 10%), topped up with points on the main diagonal."""
    mid = 0.5 * (lo + hi)
    half = 0.45 * (hi - lo)
    starts = [mid + half * np.array(s) for s in itertools.product((-1.0, 1.0), repeat=len(lo))]
    extra = count - len(starts)
    if extra > 0:
        starts += [mid + half * f for f in np.linspace(-0.8, 0.8, extra)]
    return starts[:count]


def validate_phase(phase, lam, y=None, epsilon=0.1, grid_density=41, thresholds=None, y_tol=1e-6):
    """Sample the domain box and test the gradient, Hessian and derivative conditions.

    Solver failures become failed conditions in the report, not exceptions.
    """
    if not (0 < epsilon < 0.5):
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if grid_density < 20:
        raise ValueError("grid_density must be at least 20 points per axis")
    th = thresholds or Thresholds()
    y = _as_y(y, phase.dim_y)
    lo, hi = phase.domain
    n = phase.dim_x
    notes = []

    cp = None
    try:
        cp = find_critical_point(phase, lam, y)
    except (SingularHessian, NoConvergence) as exc:
        notes.append(f"critical point: {type(exc).__name__}: {exc}")

    if cp is not None and (np.any(cp.location < lo - 1e-12) or np.any(cp.location > hi + 1e-12)):
        notes.append(f"critical point {cp.location.tolist()} lies outside the domain box")

    roots = []
    for x0 in _start_points(lo, hi):
        try:
            r = find_critical_point(phase, lam, y, x0=x0)
        except (SingularHessian, NoConvergence):
            continue
        if np.all(r.location >= lo - 1e-12) and np.all(r.location <= hi + 1e-12):
            roots.append(r.location)
    if cp is not None:
        roots.append(cp.location)
    if roots and max(np.linalg.norm(r - roots[-1]) for r in roots) > y_tol:
        notes.append("MultipleRoots: Newton starts converged to distinct critical points")

    if cp is not None:
        mu = cp.mu
    else:
        mu = phase.scale(lam, y)
        if mu is None:
            mu = estimate_scale(phase, lam, y, phase.hessian(lam, 0.5 * (lo + hi), y))
    mu = float(mu)

    pts = _grid(lo, hi, grid_density)

    # condition 1: |grad phi| >= c_eps mu away from the critical point
    if cp is not None:
        shell = cp.location + epsilon * _sphere_directions(n, max(8, 4 * grid_density))
        shell = shell[np.all((shell >= lo) & (shell <= hi), axis=-1)]
        far = pts[np.linalg.norm(pts - cp.location, axis=-1) >= epsilon]
        sample = np.concatenate([far, shell]) if len(shell) else far
    else:
        sample = pts
    if len(sample):
        g = np.linalg.norm(phase.grad(lam, sample, y), axis=-1)
        m1 = float(np.min(g) / mu)
    else:
        m1 = math.inf
    thr1 = th.gradient_factor * epsilon
    cond1 = Condition(m1, m1 >= thr1, thr1)

    # condition 2: |det Hess| >= C mu^n at the critical point
    m2 = abs(cp.hessian_det) / mu**n if cp is not None else 0.0
    cond2 = Condition(float(m2), m2 >= th.hessian_min, th.hessian_min)

    # condition 3: |D^gamma phi| <= C_gamma mu for 1 <= |gamma| <= max_order
    m3 = 0.0
    for k in range(1, th.max_order + 1):
        for gam in multi_indices(n, k):
            m3 = max(m3, float(np.max(np.abs(phase.derivative(lam, pts, y, gam)))))
    m3 /= mu
    cond3 = Condition(m3, m3 <= th.derivs_max, th.derivs_max)

    return ValidationReport(
        epsilon=float(epsilon),
        lam=float(lam),
        y=y.tolist(),
        mu=mu,
        critical_point=None if cp is None else cp.location.tolist(),
        cond_gradient=cond1,
        cond_hessian=cond2,
        cond_derivs=cond3,
        thresholds=th,
        warnings=notes,
        grid_density=int(grid_density),
    )
