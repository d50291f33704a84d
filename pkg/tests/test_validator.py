import json

import numpy as np
import pytest

from oscbound import (
    Thresholds,
    make_nonexample_cubic,
    make_nonexample_psi,
    make_perturbed_phase,
    make_schrodinger_phase,
    validate_phase,
)


@pytest.mark.parametrize("n", [1, 2])
def test_example1_passes(n):
    rep = validate_phase(make_schrodinger_phase(0.3, dim=n), 10.0, [0.1] * n, epsilon=0.1)
    assert rep.passed
    assert rep.cond_gradient.measured >= 2 * 0.1 * (1 - 1e-9)
    assert rep.cond_hessian.measured == pytest.approx(2.0**n)


def test_example2_random_coefficients():
    rng = np.random.default_rng(11)
    lam_range = (10.0, 1e6)
    for _ in range(10):
        # |q(s)| <= 1/2 for s in [0, 0.1] since each term is at most 1/6
        q = list(rng.uniform(-0.5, 0.5, 3) / 3)
        ph = make_perturbed_phase(0.5, q, lam_range=lam_range)
        for lam in (10.0, 1e3, 1e6):
            assert validate_phase(ph, lam, [0.2]).passed


@pytest.mark.parametrize("lam", [1e2, 1e3, 1e4])
def test_psi_fails_condition_three(lam):
    rep = validate_phase(make_nonexample_psi(0.5), lam, [0.0])
    assert not rep.cond_derivs.passed
    assert rep.cond_hessian.passed


def test_psi_derivative_constant_grows_like_lambda():
    a = validate_phase(make_nonexample_psi(0.5), 1e3, [0.0]).cond_derivs.measured
    b = validate_phase(make_nonexample_psi(0.5), 1e4, [0.0]).cond_derivs.measured
    # order-4 term dominates: lam^2 / mu
    assert b / a == pytest.approx(100, rel=0.05)


def test_cubic_fails_hessian_at_zero():
    rep = validate_phase(make_nonexample_cubic(1.0, dim=2), 10.0, [0.0, 0.0])
    assert rep.cond_hessian.measured == 0.0
    assert not rep.cond_hessian.passed
    assert not rep.passed


def test_cubic_multiple_roots_warning():
    rep = validate_phase(make_nonexample_cubic(1.0, dim=2), 10.0, [0.12, 0.0])
    assert any("MultipleRoots" in w for w in rep.warnings)


def test_solver_failure_is_recorded():
    rep = validate_phase(make_nonexample_cubic(1.0), 10.0, [-0.1])
    assert not rep.passed
    assert not rep.cond_hessian.passed


def test_thresholds_configurable():
    th = Thresholds(hessian_min=5.0)
    assert not validate_phase(make_schrodinger_phase(0.3), 10.0, [0.0], thresholds=th).cond_hessian.passed


def test_report_deterministic_and_json():
    ph = make_schrodinger_phase(0.4, dim=2)
    a = json.dumps(validate_phase(ph, 50.0, [0.1, 0.2]).as_dict(), sort_keys=True)
    b = json.dumps(validate_phase(ph, 50.0, [0.1, 0.2]).as_dict(), sort_keys=True)
    assert a == b
    d = json.loads(a)
    assert set(d) >= {"cond_gradient", "cond_hessian", "cond_derivs", "pass", "epsilon"}


@pytest.mark.parametrize(
    "ph,lam,y",
    [
        (make_schrodinger_phase(0.3, dim=2), 10.0, [0.1, -0.2]),
        (make_perturbed_phase(0.5, [0.2, 0.1], dim=2), 10.0, [0.2, 0.0]),
        (make_nonexample_psi(0.5, dim=2), 2.0, [0.1, 0.0]),
    ],
    ids=["schrodinger", "perturbed", "psi-low-lambda"],
)
def test_grid_adequacy(ph, lam, y):
    # single-critical-point phases that the grid resolves; the cubic with two
    # roots has a gradient minimum that is grid-dependent by construction
    base = validate_phase(ph, lam, y, grid_density=21)
    fine = validate_phase(ph, lam, y, grid_density=42)
    for name in ("cond_gradient", "cond_hessian", "cond_derivs"):
        m0, m1 = getattr(base, name).measured, getattr(fine, name).measured
        assert abs(m1 - m0) <= 0.05 * max(abs(m0), 1e-12)
