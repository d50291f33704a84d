import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscbound import (
    CallablePhase,
    NoConvergence,
    SingularHessian,
    find_critical_point,
    make_nonexample_cubic,
    make_nonexample_psi,
    make_perturbed_phase,
    make_schrodinger_phase,
)
from oscbound.phases import fd_partial, multi_indices

unit = st.floats(-0.95, 0.95)


def test_schrodinger_critical_point_1d():
    cp = find_critical_point(make_schrodinger_phase(0.5), 10.0, [0.3])
    assert cp.location[0] == pytest.approx(0.3, abs=1e-12)
    assert cp.mu == 0.5


def test_schrodinger_hessian_det_2d():
    cp = find_critical_point(make_schrodinger_phase(0.5, dim=2), 10.0, [0.1, -0.2])
    assert cp.hessian_det == pytest.approx(1.0, rel=1e-12)


def test_zero_y_gives_origin():
    for t in (0.01, 0.3, 1.0):
        cp = find_critical_point(make_schrodinger_phase(t), 50.0, [0.0])
        assert cp.location[0] == 0.0
        assert cp.value == 0.0


def test_quarter_t_reaches_boundary():
    cp = find_critical_point(make_schrodinger_phase(0.25), 1.0, [0.5])
    assert cp.location[0] == pytest.approx(1.0, abs=1e-12)


def test_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        make_schrodinger_phase(0.0)
    with pytest.raises(ValueError):
        make_nonexample_cubic(-1.0)


def test_perturbed_critical_point():
    ph = make_perturbed_phase(0.5, [0.0, 1.0], lam_range=(1.0, 1e8))
    cp = find_critical_point(ph, 10.0, [0.3])
    assert cp.location[0] == pytest.approx(0.3 / 1.1, abs=1e-12)
    assert cp.mu == pytest.approx(0.55)
    far = find_critical_point(ph, 1e8, [0.3])
    assert far.location[0] == pytest.approx(0.3, abs=1e-8)


def test_perturbed_rejects_vanishing_factor():
    with pytest.raises(ValueError):
        make_perturbed_phase(1.0, [-2.0], lam_range=(1.0, 10.0))
    with pytest.raises(ValueError):
        # 1 - 4s crosses zero at s = 0.25, i.e. lam = 4
        make_perturbed_phase(1.0, [0.0, -4.0], lam_range=(1.0, 100.0))


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 1e6), unit, unit, st.floats(0.01, 1.0))
def test_zero_perturbation_is_schrodinger(lam, x, y, t):
    a = make_schrodinger_phase(t)
    b = make_perturbed_phase(t, [0.0, 0.0])
    assert a.value(lam, [x], [y]) == b.value(lam, [x], [y])
    assert np.array_equal(a.grad(lam, [x], [y]), b.grad(lam, [x], [y]))


def test_zero_perturbation_bulk():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, (1000, 2))
    a, b = make_schrodinger_phase(0.4, dim=2), make_perturbed_phase(0.4, [], dim=2)
    for lam in (3.0, 1e4):
        assert np.array_equal(a.value(lam, x, [0.1, 0.2]), b.value(lam, x, [0.1, 0.2]))


@settings(max_examples=30, deadline=None)
@given(unit, unit, st.floats(0.01, 1.0))
def test_example1_solver_matches_formula(y1, y2, t):
    y = np.array([y1, y2])
    ph = make_schrodinger_phase(t, dim=2, domain=([-100.0] * 2, [100.0] * 2))
    cp = find_critical_point(ph, 10.0, y)
    np.testing.assert_allclose(cp.location, y / (2 * t), rtol=0, atol=1e-10 * max(1.0, 1 / t))
    assert cp.gradient_norm <= 1e-10 * cp.mu


def test_example1_high_order_derivatives_vanish():
    ph = make_schrodinger_phase(0.7, dim=2)
    x = np.random.default_rng(2).uniform(-1, 1, (50, 2))
    for order in (3, 4):
        for g in multi_indices(2, order):
            assert np.all(ph.derivative(5.0, x, [0.1, 0.3], g) == 0.0)


BUILTINS = [
    make_schrodinger_phase(0.4, dim=2),
    make_perturbed_phase(0.6, [0.2, -0.3], dim=2),
    make_nonexample_psi(0.5, dim=2),
    make_nonexample_cubic(1.0, dim=2),
]


@pytest.mark.parametrize("ph", BUILTINS, ids=lambda p: p.name)
def test_analytic_derivatives_match_finite_differences(ph):
    rng = np.random.default_rng(3)
    h = 1e-5 * 2.0  # domain width 2
    for _ in range(100):
        lam = float(10 ** rng.uniform(0, 1.5))
        x = rng.uniform(-0.9, 0.9, 2)
        y = rng.uniform(-0.9, 0.9, 2)
        f = lambda p: ph.value(lam, p, y)
        g = ph.grad(lam, x, y)
        H = ph.hessian(lam, x, y)
        g_fd = np.array([fd_partial(f, x, e, h) for e in ((1, 0), (0, 1))])
        # second-order stencils lose digits at this step; use a wider one
        H_fd = np.array([[fd_partial(f, x, tuple(np.add(a, b)), 1e-3) for b in ((1, 0), (0, 1))]
                         for a in ((1, 0), (0, 1))])
        scale_g = max(np.abs(g).max(), 1.0)
        assert np.abs(g - g_fd).max() <= 1e-6 * scale_g
        assert np.abs(H - H_fd).max() <= 1e-4 * max(np.abs(H).max(), 1.0)


def test_psi_third_derivative_grows_with_lambda():
    ph = make_nonexample_psi(0.5)
    x = np.linspace(-1, 1, 2001)[:, None]
    sup3 = max(np.abs(ph.derivative(100.0, x, [0.0], (3,))))
    assert sup3 > 10 * 0.5
    assert sup3 == pytest.approx(100.0, rel=1e-3)


def test_psi_zero_reduces_to_example1():
    zero = lambda u: 0.0 * u
    ph = make_nonexample_psi(0.5, psi=zero)
    ref = make_schrodinger_phase(0.5)
    x = np.linspace(-1, 1, 11)[:, None]
    np.testing.assert_allclose(ph.value(30.0, x, [0.2]), ref.value(30.0, x, [0.2]), atol=1e-15)


def test_cubic_degenerate_at_zero():
    cp = find_critical_point(make_nonexample_cubic(1.0, dim=2), 10.0, [0.0, 0.0])
    assert cp.hessian_det == 0.0
    assert cp.hessian[0, 0] == 0.0


def test_cubic_two_roots():
    ph = make_nonexample_cubic(1.0, dim=2)
    plus = find_critical_point(ph, 10.0, [0.12, 0.0], x0=[0.5, 0.0])
    minus = find_critical_point(ph, 10.0, [0.12, 0.0], x0=[-0.5, 0.0])
    assert plus.location[0] == pytest.approx(0.2, abs=1e-12)
    assert minus.location[0] == pytest.approx(-0.2, abs=1e-12)


def test_cubic_hessian_value():
    ph = make_nonexample_cubic(1.0)
    assert ph.hessian(10.0, [0.1], [0.03])[0, 0] == pytest.approx(0.6)
    cp = find_critical_point(ph, 10.0, [0.03], x0=[0.2])
    assert cp.hessian_det == pytest.approx(0.6, rel=1e-10)


def test_cubic_no_real_root():
    with pytest.raises((SingularHessian, NoConvergence)):
        find_critical_point(make_nonexample_cubic(1.0), 10.0, [-0.1])


def test_callable_phase_finite_differences():
    ph = CallablePhase(lambda lam, x, y: np.sum(x**2, axis=-1) + 0.1 * np.sum(x**3, axis=-1) - x @ y, 2)
    cp = find_critical_point(ph, 1.0, [0.2, 0.0], x0=[0.0, 0.0])
    assert cp.gradient_norm <= 1e-10 * cp.mu
    assert cp.mu == pytest.approx(np.sqrt(abs(cp.hessian_det)))
    assert np.allclose(cp.hessian, cp.hessian.T, rtol=1e-12)
