import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oscbound import (
    TooFewPoints,
    ZeroBound,
    annulus_bound,
    annulus_exponent,
    check_bound,
    extract_b,
    fit_decay,
    make_chirp_symbol,
    make_schrodinger_phase,
    make_smooth_bump,
    mu_scaling_fit,
    theorem_bound,
)


def test_exact_power_law():
    f = fit_decay([(10.0, 0.1), (1e2, 1e-2), (1e3, 1e-3), (1e4, 1e-4), (1e5, 1e-5)])
    assert f.slope == pytest.approx(-1.0, abs=1e-12)
    assert f.r_squared == pytest.approx(1.0)
    assert f.discarded == 1 and f.n_points == 4


def test_constant_magnitudes():
    f = fit_decay([(l, 3.0) for l in np.geomspace(1, 1e5, 9)])
    assert f.slope == pytest.approx(0.0, abs=1e-12)


def test_gaussian_closed_form_slope():
    lams = np.geomspace(1e2, 1e6, 9)
    f = fit_decay([(l, math.sqrt(math.pi) * (1 + l * l) ** -0.25) for l in lams])
    assert f.slope == pytest.approx(-0.5, abs=0.02)


def test_zero_magnitudes_counted():
    pts = [(l, l**-0.5) for l in np.geomspace(10, 1e5, 9)] + [(2e5, 0.0)]
    f = fit_decay(pts)
    assert f.discarded == 3  # two in the first decade, one zero
    assert f.slope == pytest.approx(-0.5)


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        fit_decay([(1.0, 1.0), (10.0, 0.5), (100.0, 0.2), (1000.0, 0.1)])


def test_duplicate_lambdas_rejected():
    with pytest.raises(ValueError):
        fit_decay([(1.0, 1.0)] * 6)


def test_mu_fit_synthetic():
    f = mu_scaling_fit([(m, m**-2) for m in np.geomspace(0.01, 1, 6)])
    assert f.slope == pytest.approx(-2.0)
    assert f.discarded == 0


samples = st.lists(
    st.tuples(st.floats(1.0, 1e8), st.floats(1e-12, 1e3)), min_size=8, max_size=25, unique_by=lambda p: p[0]
)


def _spread(pts):
    lams = sorted(p[0] for p in pts)
    return sum(1 for l in lams if l >= 10 * lams[0] * (1 - 1e-12))


@settings(max_examples=100, deadline=None)
@given(samples, st.floats(1e-6, 1e6))
def test_affine_equivariance(pts, c):
    assume(_spread(pts) >= 4)
    assume(np.ptp(np.log([p[0] for p in pts if p[0] >= 10 * min(q[0] for q in pts)])) > 1e-3)
    a = fit_decay(pts)
    b = fit_decay([(l, c * m) for l, m in pts])
    assert b.slope == pytest.approx(a.slope, rel=1e-12, abs=1e-10)
    assert b.intercept - a.intercept == pytest.approx(math.log(c), rel=1e-9, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(samples, st.randoms(use_true_random=False))
def test_order_invariance(pts, rnd):
    assume(_spread(pts) >= 4)
    shuffled = list(pts)
    rnd.shuffle(shuffled)
    assert fit_decay(shuffled) == fit_decay(pts)


def test_bound_identity_and_zero():
    pts = [((l,), l**-0.5) for l in (1.0, 10.0, 100.0)]
    assert check_bound(pts, lambda p: p[0] ** -0.5).constant == pytest.approx(1.0)
    assert check_bound([((l,), 0.0) for l in (1.0, 2.0)], lambda p: 1.0).constant == 0.0


def test_bound_worst_point_and_cap():
    pts = [((1.0,), 1.0), ((2.0,), 5.0), ((3.0,), 2.0)]
    bc = check_bound(pts, lambda p: 1.0, cap=4.0)
    assert bc.constant == 5.0 and bc.worst_point == (2.0,)
    assert not bc.passed


def test_zero_bound():
    with pytest.raises(ZeroBound):
        check_bound([((1.0,), 1.0)], lambda p: 0.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=20), st.floats(0, 1e6))
def test_bound_monotone(mags, extra):
    pts = [((i,), m) for i, m in enumerate(mags)]
    before = check_bound(pts, lambda p: 1.0 + p[0]).constant
    after = check_bound(pts + [((len(mags),), extra)], lambda p: 1.0 + p[0]).constant
    assert after >= before


def test_bound_formulas():
    assert theorem_bound(1e4, 1.0, 1, 0.5) == pytest.approx(1e-2)
    assert theorem_bound(1e4, 0.5, 2, 0.5, order=1) == pytest.approx(4 * 1e-4 * 1e2)
    assert annulus_exponent(1, 0.5, 0.25, 1, 4) == pytest.approx(-1.75)
    lam = 1e4
    assert annulus_bound(lam, 1.0, 1, 0.5, 0.25, 1, 4) == pytest.approx(lam ** annulus_exponent(1, 0.5, 0.25, 1, 4))


def _mu_pts(symbol, lam=1e4):
    out = []
    for t in np.geomspace(0.05, 1.0, 7):
        s = extract_b(make_schrodinger_phase(t), symbol, lam, [0.0])
        out.append((s.mu, s.magnitude))
    return out


def test_mu_scaling_chirp_range():
    # documented expectation; measured slope is about -0.50 (see README)
    slope = mu_scaling_fit(_mu_pts(make_chirp_symbol(0.5, [1.0]))).slope
    assert -1.3 <= slope <= -0.7


def test_mu_scaling_smooth_symbol():
    slope = mu_scaling_fit(_mu_pts(make_smooth_bump([0.0]))).slope
    assert -0.7 <= slope <= -0.3
