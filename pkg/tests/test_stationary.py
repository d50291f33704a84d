import math
import warnings

import numpy as np
import pytest

from oscbound import (
    QuadSpec,
    QuadratureNoiseWarning,
    RadiusExceedsDomain,
    SingularHessian,
    StencilOutOfDomain,
    b_derivative,
    b_derivative_sample,
    extract_b,
    fit_decay,
    integrate,
    leading_order,
    local_form_residual,
    make_chirp_symbol,
    make_gaussian_symbol,
    make_nonexample_cubic,
    make_nonexample_psi,
    make_perturbed_phase,
    make_schrodinger_phase,
    make_shrinking_bump,
    make_smooth_bump,
    mu_scaling_fit,
    vdc_split,
)

X2 = make_schrodinger_phase(1.0, domain=([-10.0], [10.0]))
GAUSS = make_gaussian_symbol(1)


def test_leading_order_gaussian():
    lo = leading_order(X2, GAUSS, 100.0, [0.0])
    assert abs(lo) == pytest.approx(math.sqrt(math.pi / 100), rel=1e-12)
    assert abs(lo) == pytest.approx(0.177245, abs=5e-7)
    exact = abs(integrate(X2, GAUSS, 100.0, [0.0]).value)
    assert exact == pytest.approx(math.sqrt(math.pi) * (1 + 100.0**2) ** -0.25, rel=1e-12)
    assert exact == pytest.approx(0.177240, abs=1e-6)  # quoted value is truncated, not rounded
    # phase e^{i pi/4} for a positive definite 1-D Hessian
    assert np.angle(lo) == pytest.approx(math.pi / 4)


def test_leading_order_vanishing_amplitude():
    a = make_shrinking_bump(0.5, [0.5])
    assert leading_order(make_schrodinger_phase(1.0), a, 100.0, [0.0]) == 0


def test_leading_order_two_dim():
    ph = make_schrodinger_phase(0.5, dim=2)
    a = make_smooth_bump([0.0, 0.0], 1.0)
    y = np.array([0.2, -0.1])
    lam = 500.0
    # x(y) = y when t = 1/2, det Hess = 1
    expect = 2 * math.pi / lam * abs(a(lam, y[None, :])[0])
    assert abs(leading_order(ph, a, lam, y)) == pytest.approx(expect, rel=1e-12)


def test_leading_order_rejects_degenerate():
    with pytest.raises(SingularHessian):
        leading_order(make_nonexample_cubic(1.0), make_smooth_bump([0.0]), 10.0, [0.0])


def test_extract_b_modulus():
    ph = make_schrodinger_phase(0.7)
    a = make_chirp_symbol(0.5, [1.0])
    s = extract_b(ph, a, 300.0, [0.2])
    assert s.magnitude == pytest.approx(abs(s.quad.value), rel=1e-15)
    assert s.mu == 0.7


def test_extract_b_near_leading_order():
    ph = make_schrodinger_phase(1.0)
    a = make_smooth_bump([0.0])
    s = extract_b(ph, a, 1e4, [0.0])
    assert s.magnitude == pytest.approx(abs(leading_order(ph, a, 1e4, [0.0])), rel=0.05)


def test_chirp_b_under_theorem_bound():
    ph = make_schrodinger_phase(1.0)
    a = make_chirp_symbol(0.5, [1.0])
    for lam in np.geomspace(1e2, 1e5, 7):
        assert extract_b(ph, a, lam, [0.0]).magnitude <= 2 * lam**-0.5


def test_gamma_zero_is_b():
    ph = make_schrodinger_phase(0.5)
    a = make_chirp_symbol(0.5, [1.0])
    assert b_derivative(ph, a, 100.0, [0.1], (0,)) == extract_b(ph, a, 100.0, [0.1]).b_value


def test_stencil_out_of_domain():
    ph = make_schrodinger_phase(0.5)
    with pytest.raises(StencilOutOfDomain):
        b_derivative(ph, make_chirp_symbol(0.5, [1.0]), 100.0, [0.999], (1,))


def test_noise_flag():
    ph = make_schrodinger_phase(1.0)
    with pytest.warns(QuadratureNoiseWarning):
        d = b_derivative_sample(ph, make_smooth_bump([0.0]), 100.0, [0.0], (1,), QuadSpec(rel_tol=1e-3), step=1e-12)
    assert d.noisy


def test_derivative_bounded_for_smooth_symbol():
    ph = make_schrodinger_phase(1.0)
    a = make_smooth_bump([0.0])
    for lam in (1e2, 1e3, 1e4):
        d = b_derivative(ph, a, lam, [0.05], (1,))
        assert math.isfinite(abs(d))
        assert abs(d) <= 10 * lam**-0.5


def test_second_derivative_stencil():
    ph = make_schrodinger_phase(0.5, dim=2)
    a = make_chirp_symbol(0.5, [1.0, 0.0])
    d = b_derivative_sample(ph, a, 100.0, [0.1, 0.1], (1, 1))
    assert len(d.samples) == 4
    with pytest.raises(ValueError):
        b_derivative(ph, a, 100.0, [0.1, 0.1], (2, 1))


def test_derivative_gap_is_beta():
    ph = make_schrodinger_phase(1.0)
    a = make_chirp_symbol(0.5, [1.0])
    lams = np.geomspace(1e2, 1e5, 8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureNoiseWarning)
        b = [(l, extract_b(ph, a, l, [0.0]).magnitude) for l in lams]
        d = [(l, abs(b_derivative(ph, a, l, [0.0], (1,)))) for l in lams]
    gap = fit_decay(d).slope - fit_decay(b).slope
    assert gap == pytest.approx(0.5, abs=0.15)


def test_derivative_t_scaling():
    # d_y x(y) = 1/(2t): relative size of the y-derivative goes like t^-1
    lam = 1e4
    a = make_chirp_symbol(0.5, [1.0])
    pts = []
    for t in np.geomspace(0.05, 1.0, 6):
        ph = make_schrodinger_phase(t)
        pts.append((t, abs(b_derivative(ph, a, lam, [0.0], (1,))) / extract_b(ph, a, lam, [0.0]).magnitude))
    assert -1.2 <= mu_scaling_fit(pts).slope <= -0.8


@pytest.mark.parametrize("alpha", [0.25, 0.5])
def test_split_partition(alpha):
    s = vdc_split(make_schrodinger_phase(1.0), make_chirp_symbol(0.5, [1.0]), 1e3, [0.1], alpha)
    assert s.partition_error <= 1e-6
    assert s.excision_radius == pytest.approx(1e3**-alpha)


def test_split_balance_and_measure_bound():
    s = vdc_split(X2, GAUSS, 1e4, [0.0], 0.5)
    ratio = abs(s.inner.value) / abs(s.outer.value)
    assert 0.1 <= ratio <= 10
    assert abs(s.inner.value) <= 3 * s.excision_radius * 1.0


def test_split_alpha_range():
    with pytest.raises(ValueError):
        vdc_split(make_schrodinger_phase(1.0), make_chirp_symbol(0.75, [1.0]), 1e3, [0.0], 0.5)


def test_split_radius_exceeds_domain():
    with pytest.raises(RadiusExceedsDomain):
        vdc_split(make_schrodinger_phase(1e-3, domain=([-1.0], [1.0])), make_smooth_bump([0.0]), 10.0, [0.0], 0.5)


def test_residual_exact_quadratics():
    assert local_form_residual(make_schrodinger_phase(0.3), 10.0, [0.1]) == 0.0
    assert local_form_residual(make_perturbed_phase(0.3, [0.1], dim=3), 1e3, [0.1, 0.2, 0.0]) == 0.0


def test_residual_psi_grows_linearly():
    ph = make_nonexample_psi(0.5)
    r2 = local_form_residual(ph, 1e2, [0.0])
    r3 = local_form_residual(ph, 1e3, [0.0])
    assert r3 / r2 == pytest.approx(10, rel=0.05)


def test_residual_cubic_bounded():
    for t in (0.2, 1.0):
        ph = make_nonexample_cubic(t, dim=2)
        cp_y = [0.03, 0.1]
        assert local_form_residual(ph, 10.0, cp_y) <= 1.0 * t / ph.scale(10.0) + 1e-9
