import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from chaplab.acceptance import random_classical_test_functions
from chaplab.charmap import PhysCoord
from chaplab.errors import ConfigError, DomainError
from chaplab.singularity import analyze
from chaplab.weakform import (
    Excision,
    Slice,
    TestFunction,
    admissible_radius,
    aitken,
    concentrated_mass,
    epsilon_sweep,
    mass_window,
    rankine_hugoniot_check,
    richardson,
    state_on_slice,
    support_fits,
    weak_residual,
)


def _slice_mass_oracle(data, t, x1, x2):
    # rho dx = 2 mu / D(beta) d(beta) along the slice
    sl = Slice(data, t)
    b1, b2 = sl.beta_for_x(np.array([x1, x2]))
    val = quad(lambda z: 1.0 / float(data.gap(z)), b1, b2, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return 2.0 * data.mu * val


def test_test_function_shape():
    phi = TestFunction(PhysCoord(1.0, 2.0), 0.5)
    assert phi.value(1.0, 2.0) == 1.0
    assert phi.value(1.0, 2.5) == 0.0
    assert phi.x_range(1.3) == pytest.approx((1.6, 2.4))
    assert phi.x_range(1.5) is None
    with pytest.raises(ConfigError):
        TestFunction(PhysCoord(0.0, 0.0), 0.0)


@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
def test_test_function_gradient_matches_differences(dt, dx):
    phi = TestFunction(PhysCoord(1.0, 2.0), 0.5)
    t, x, h = 1.0 + dt, 2.0 + dx, 1e-6
    gt, gx = phi.grad(t, x)
    assert gt == pytest.approx((phi.value(t + h, x) - phi.value(t - h, x)) / (2 * h), abs=1e-8)
    assert gx == pytest.approx((phi.value(t, x + h) - phi.value(t, x - h)) / (2 * h), abs=1e-8)


def test_constant_state_residual_vanishes(flat):
    for c, R in [((0.3, 0.0), 0.25), ((-0.1, 1.0), 0.4), ((1.0, -2.0), 0.6)]:
        m, p = weak_residual(flat, TestFunction(PhysCoord(*c), R))
        assert abs(m) <= 1e-10 and abs(p) <= 1e-10


def test_constant_state_excision_leaves_boundary_flux(flat):
    # rho = 1, u = 0: removing a box leaves -iint_box phi_t = int phi(t_lo, x) - phi(t_hi, x) dx
    phi = TestFunction(PhysCoord(0.5, 0.0), 0.4)
    m, _ = weak_residual(flat, phi, Excision.box(0.6, 0.05, 0.1))
    ref = quad(lambda x: phi.value(0.5, x) - phi.value(0.7, x), -0.05, 0.15, epsabs=1e-14)[0]
    assert abs(ref) > 1e-2
    assert m == pytest.approx(ref, abs=1e-10)


def test_cusp_classical_residuals(cusp, rng):
    for phi in random_classical_test_functions(cusp, 4, rng):
        m, p = weak_residual(cusp, phi, tol=1e-10)
        assert abs(m) <= 1e-8 and abs(p) <= 1e-8


def test_point_residual_with_excision_is_small(point, point_report):
    phi = TestFunction(point_report.blowup, 0.5)
    m, p = weak_residual(point, phi, Excision.box(point_report.blowup.t, point_report.blowup.x, 0.05))
    assert math.isfinite(m) and 0 < abs(m) < 1e-2
    # the point data are symmetric about x0, so momentum cancels
    assert abs(p) < 1e-10


def test_support_fits_and_admissible_radius(point, point_report):
    c = point_report.blowup
    r = admissible_radius(point, c, 0.5)
    assert 0 < r <= 0.5 and support_fits(point, c, r)
    with pytest.raises(DomainError):
        admissible_radius(point, PhysCoord(c.t, 1e6), 0.5, tries=3)


def test_aitken_recovers_geometric_limit():
    seq = [3.0 + 2.0 * 0.5**k for k in range(6)]
    assert aitken(seq) == pytest.approx(3.0, abs=1e-12)
    assert aitken([1.0, 2.0]) == 2.0
    assert aitken([1.0, 2.0, 3.0]) == 3.0


@given(st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_richardson_exact_for_model(L, c1, c2):
    d = np.array([1e-2, 1e-3, 1e-4])
    ex = [2.0 / 3.0, 1.0]
    v = L + c1 * d ** ex[0] + c2 * d
    assert richardson(d, v, ex) == pytest.approx(L, abs=1e-9)


def test_sweep_rejects_bad_epsilons(point, point_report):
    phi = TestFunction(point_report.blowup, 0.5)
    with pytest.raises(ConfigError):
        epsilon_sweep(point, phi, [0.1, 0.2], point_report)
    with pytest.raises(ConfigError):
        epsilon_sweep(point, phi, [0.1, 0.0], point_report)


def test_point_sweep_decreases(point, point_report):
    sw = epsilon_sweep(point, TestFunction(point_report.blowup, 0.5), [0.2, 0.1, 0.05], point_report)
    mags = np.abs(sw.mass_residuals)
    assert np.all(np.diff(mags) < 0) and sw.monotone
    assert all(m <= e for m, e in zip(mags, sw.envelope))
    assert sw.fitted_order > 2.0


def test_mass_window_constant_state(flat):
    assert mass_window(flat, 0.4, (-0.5, 0.5)) == pytest.approx(1.0, abs=1e-13)


@pytest.fixture(scope="module")
def point_masses(point, point_report):
    t0, x0 = point_report.blowup.t, point_report.blowup.x
    w = (x0 - 0.1, x0 + 0.1)
    return {
        "at": mass_window(point, t0, w),
        "before": mass_window(point, t0 - 1e-6, w),
        "coarse": mass_window(point, t0, w, levels=10),
        "oracle": _slice_mass_oracle(point, t0, *w),
    }


def test_mass_window_at_blowup_matches_slice_oracle(point_masses):
    assert math.isfinite(point_masses["at"])
    assert point_masses["at"] == pytest.approx(point_masses["oracle"], rel=1e-7)


def test_mass_window_continuous_as_t_increases_to_blowup(point_masses):
    # |dM/dt| = |rho u| at the window edges is O(1), so a 1e-6 step moves M by O(1e-6)
    assert point_masses["before"] == pytest.approx(point_masses["at"], abs=5e-6)


def test_mass_window_nondecreasing_in_levels(point_masses):
    assert point_masses["coarse"] <= point_masses["at"]


def test_mass_window_refuses_concentrated_line(line2):
    r = analyze(line2)[0]
    t = 0.5 * sum(r.line_extent)
    with pytest.raises(DomainError):
        mass_window(line2, t, (r.blowup.x - 0.2, r.blowup.x + 0.2))


def test_contact_report_not_applicable_for_point(point):
    rep = rankine_hugoniot_check(point)
    assert not rep.applicable and rep.passed


def test_contact_line1_deep_deltas_pass(line1):
    rep = rankine_hugoniot_check(line1, deltas=(1e-6, 1e-7, 1e-8), n_samples=4)
    assert rep.passed and len(rep.samples) == 4
    assert rep.sup_abs_rho_u <= 2.0 * line1.mu + 1e-6


def test_contact_line1_needs_three_deltas(line1):
    with pytest.raises(ConfigError):
        rankine_hugoniot_check(line1, deltas=(1e-3, 1e-4), n_samples=1)


def test_line2_concentrated_mass_rises_then_falls(line2):
    r = analyze(line2)[0]
    t0, t_hat = r.line_extent
    ts = t0 + (t_hat - t0) * np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    m = [concentrated_mass(line2, t) for t in ts]
    assert all(v > 0 for v in m)
    assert m[0] < m[1] < m[2] and m[2] > m[3] > m[4]
    assert concentrated_mass(line2, 0.5 * t0) == 0.0


def test_line2_momentum_feeds_the_line(line2):
    # mass flows into x0 from both sides before the midpoint and out of it afterwards;
    # the one-sided limits are only reached inside a layer much thinner than 1e-4
    r = analyze(line2)[0]
    t0, t_hat = r.line_extent
    x0 = r.blowup.x
    dx = np.array([-1e-8, 1e-8])
    early = state_on_slice(line2, t0 + 0.25 * (t_hat - t0), x0 + dx)
    late = state_on_slice(line2, t0 + 0.75 * (t_hat - t0), x0 + dx)
    ru_e = early["rho"] * early["u"]
    ru_l = late["rho"] * late["u"]
    assert ru_e[0] > 0 > ru_e[1]
    assert ru_l[0] < 0 < ru_l[1]
    assert np.all(np.abs(np.concatenate([ru_e, ru_l])) <= 2.0 * line2.mu + 1e-9)
    # dm/dt matches the net inflow rho u(x0-) - rho u(x0+)
    for t, ru in ((t0 + 0.25 * (t_hat - t0), ru_e), (t0 + 0.75 * (t_hat - t0), ru_l)):
        h = 1e-5
        dm = (concentrated_mass(line2, t + h) - concentrated_mass(line2, t - h)) / (2 * h)
        assert dm == pytest.approx(ru[0] - ru[1], rel=0.05)
