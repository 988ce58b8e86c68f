import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from chaplab.charmap import (
    CharCoord,
    LocalChart,
    PhysCoord,
    char_map,
    evaluate_state,
    invert,
    jacobian,
    map_forward,
    partials,
    trace_characteristic,
)
from chaplab.errors import DomainError, NearSingularError
from chaplab.singularity import lifespan

pairs = st.tuples(st.floats(-9, 9), st.floats(0, 9)).map(lambda p: (p[0], p[0] + p[1]))


@given(pairs)
def test_constant_state_map(flat, ab):
    a, b = ab
    if b > 10.0:
        return
    q = map_forward(flat, CharCoord(a, b))
    assert abs(q.t - (b - a) / 2) <= 1e-12 and abs(q.x - (a + b) / 2) <= 1e-12


def test_constant_state_example(flat):
    q = map_forward(flat, CharCoord(0.0, 2.0))
    assert (q.t, q.x) == pytest.approx((1.0, 1.0), abs=1e-14)


def test_degenerate_pair_maps_to_initial_line(cusp):
    q = map_forward(cusp, CharCoord(1.3, 1.3))
    assert q.t == 0.0 and q.x == 1.3


def test_alpha_above_beta_rejected(cusp):
    with pytest.raises(Exception):
        CharCoord(2.0, 1.0)


def test_point_shape_blowup_image(point):
    q = map_forward(point, CharCoord(0.0, 2.0))
    assert abs(q.t - math.pi / 4) < 1e-12 and abs(q.x - 1.0) < 1e-12


def test_point_shape_forward_against_scipy(point):
    a, b = -0.7, 1.9
    t_ref = quad(lambda z: 1 / (2 * ((z - 1) ** 2 + 1)), a, b, epsabs=1e-14)[0]
    # x = alpha + int Lambda_+ / (Lambda_+ - Lambda_-)
    x_ref = a + quad(lambda z: (z - 2) ** 2 / (2 * ((z - 1) ** 2 + 1)), a, b, epsabs=1e-14)[0]
    q = map_forward(point, CharCoord(a, b))
    assert abs(q.t - t_ref) < 1e-12
    assert abs(q.x - x_ref) < 1e-12


def test_constant_state_partials(flat):
    p = jacobian(flat, CharCoord(-0.3, 1.1))
    assert (p.t_alpha, p.t_beta, p.x_alpha, p.x_beta, p.J) == pytest.approx((-0.5, 0.5, 0.5, 0.5, -0.5), abs=1e-15)


def _fd_jacobian(data, a, b, h=1e-6):
    def F(a, b):
        q = map_forward(data, CharCoord(a, b))
        return np.array([q.t, q.x])

    da = (F(a + h, b) - F(a - h, b)) / (2 * h)
    db = (F(a, b + h) - F(a, b - h)) / (2 * h)
    return da[0] * db[1] - db[0] * da[1]


def test_cusp_jacobian_vanishes_on_sigma(cusp):
    assert abs(jacobian(cusp, CharCoord(0.0, 2.0)).J) < 1e-15
    assert abs(_fd_jacobian(cusp, 0.0, 2.0)) < 1e-7


def test_point_shape_jacobian_nonzero(point):
    J = jacobian(point, CharCoord(0.0, 1.0)).J
    assert abs(J) > 0.1
    assert J == pytest.approx(_fd_jacobian(point, 0.0, 1.0), rel=1e-6)


def test_jacobian_zero_iff_invariants_meet(cusp):
    a, b = np.meshgrid(np.linspace(-2, 2, 41), np.linspace(0, 4, 41))
    keep = a < b
    a, b = a[keep], b[keep]
    J = partials(cusp, a, b).J
    meet = np.abs(cusp.lambda_minus(a) - cusp.lambda_plus(b)) <= 1e-9
    assert np.array_equal(np.abs(J) <= 1e-9, meet)


@given(st.floats(-2.5, 0.9), st.floats(0.01, 0.99))
def test_round_trip_below_lifespan(point, a, frac):
    cm = char_map(point)
    # beta on the slice t = frac * 0.95 * t0 through alpha = a; the window holds it for a <= 0.9
    t = frac * 0.95 * math.pi / 4
    b = float(cm.beta_on_slice(t, np.array(a)))
    tq, xq = cm.forward(np.array([a]), np.array([b]))
    p = cm.invert(PhysCoord(float(tq[0]), float(xq[0])))
    assert abs(p.alpha - a) <= 1e-8 and abs(p.beta - b) <= 1e-8


def test_invert_constant_state(flat):
    p = invert(flat, PhysCoord(1.0, 1.0))
    assert (p.alpha, p.beta) == pytest.approx((0.0, 2.0), abs=1e-12)


def test_invert_point_shape_half_time(point):
    q = PhysCoord(math.pi / 8, 1.0)
    p = invert(point, q)
    back = map_forward(point, p)
    assert math.hypot(back.t - q.t, back.x - q.x) <= 1e-10


def test_invert_at_blowup_is_near_singular(point):
    with pytest.raises(NearSingularError) as info:
        invert(point, PhysCoord(math.pi / 4, 1.0))
    assert info.value.jacobian_abs < 1e-6


def test_constant_state_flow(flat):
    s = evaluate_state(flat, PhysCoord(0.7, 0.2))
    assert (s.rho, s.u, s.u_x, s.u_t, s.rho_x, s.rho_t) == pytest.approx((1, 0, 0, 0, 0, 0), abs=1e-14)


def test_initial_density_point_shape(point):
    s = evaluate_state(point, PhysCoord(0.0, 0.5))
    assert s.rho == pytest.approx(0.8, abs=1e-14)


def test_density_grows_towards_point_blowup(point):
    rho = [evaluate_state(point, PhysCoord(math.pi / 4 - d, 1.0)).rho for d in (1e-1, 1e-2, 1e-3)]
    assert rho[0] < rho[1] < rho[2] and rho[2] > 1e4


def test_post_blowup_guard(point):
    with pytest.raises(DomainError):
        evaluate_state(point, PhysCoord(1.0, 1.0))


def test_state_identities(cusp, rng):
    cm = char_map(cusp)
    t0 = lifespan(cusp)
    for _ in range(20):
        q = PhysCoord(rng.uniform(0.0, 0.9 * t0), rng.uniform(0.0, 2.0))
        s = evaluate_state(cusp, q)
        assert abs(s.lambda_plus - s.lambda_minus - 2 * cusp.mu / s.rho) <= 1e-14 * max(1.0, s.lambda_plus)
        assert s.u == 0.5 * (s.lambda_plus + s.lambda_minus)
    assert cm.t0 == t0


def test_derivatives_against_finite_differences(cusp, rng):
    t0 = lifespan(cusp)
    h = 1e-5
    for _ in range(100):
        t, x = rng.uniform(0.05, 0.9 * t0), rng.uniform(0.0, 2.0)
        s = evaluate_state(cusp, PhysCoord(t, x))
        sx = [evaluate_state(cusp, PhysCoord(t, x + e * h)) for e in (1, -1)]
        st_ = [evaluate_state(cusp, PhysCoord(t + e * h, x)) for e in (1, -1)]
        for name, fd in (
            ("u_x", (sx[0].u - sx[1].u) / (2 * h)),
            ("rho_x", (sx[0].rho - sx[1].rho) / (2 * h)),
            ("u_t", (st_[0].u - st_[1].u) / (2 * h)),
            ("rho_t", (st_[0].rho - st_[1].rho) / (2 * h)),
        ):
            exact = getattr(s, name)
            assert abs(exact - fd) <= 1e-4 * max(abs(exact), 1e-3), (name, t, x)


def test_characteristic_of_constant_state(flat):
    ts = np.linspace(0, 3, 7)
    line = trace_characteristic(flat, "minus-family", 0.0, ts)
    assert np.allclose(line[:, 1], ts, atol=1e-13)


def test_invariant_constant_along_characteristic(cusp):
    ts = np.linspace(0, 0.9 * lifespan(cusp), 25)
    line = trace_characteristic(cusp, "minus-family", -0.4, ts)
    lm = [evaluate_state(cusp, PhysCoord(t, x)).lambda_minus for t, x in line[1:, :2]]
    assert np.var(lm) <= 1e-10


def test_blowup_characteristics_are_tangent(cusp, cusp_report):
    t0, x0 = cusp_report.blowup.t, cusp_report.blowup.x
    a = trace_characteristic(cusp, "minus-family", 0.0, np.array([t0]))
    b = trace_characteristic(cusp, "plus-family", 2.0, np.array([t0]))
    assert abs(a[0, 1] - x0) < 1e-9 and abs(b[0, 1] - x0) < 1e-9
    # slopes: lambda_+ on alpha = 0 and lambda_- on beta = 2 both vanish there
    assert abs(float(cusp.lambda_plus(2.0))) < 1e-15 and abs(float(cusp.lambda_minus(0.0))) < 1e-15


def test_characteristic_matches_rk4(cusp):
    """Image of a coordinate line against explicit RK4 of dx/dt = lambda_+ (alpha fixed)."""
    T = 0.8 * lifespan(cusp)
    n = 80
    ts = np.linspace(0, T, n + 1)
    line = trace_characteristic(cusp, "minus-family", -0.3, ts)

    def speed(t, x):
        return evaluate_state(cusp, PhysCoord(t, x)).lambda_plus

    x, dt, xs = -0.3, T / n, [-0.3]
    for i in range(n):
        t = ts[i]
        k1 = speed(t, x)
        k2 = speed(t + dt / 2, x + dt / 2 * k1)
        k3 = speed(t + dt / 2, x + dt / 2 * k2)
        k4 = speed(t + dt, x + dt * k3)
        x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs.append(x)
    assert np.max(np.abs(np.array(xs) - line[:, 1])) <= 1e-6


def test_trace_beyond_window(point):
    with pytest.raises(DomainError):
        trace_characteristic(point, "minus-family", 7.9, np.array([0.0, 1.5]))
    with pytest.raises(DomainError):
        trace_characteristic(point, "sideways", 0.0, np.array([0.0]))


def test_local_chart_matches_global_map(cusp):
    chart = LocalChart(cusp, 0.0, 2.0)
    cm = char_map(cusp)
    for da, db in ((-0.1, 0.05), (0.2, -0.3), (1e-4, 2e-4)):
        tt, xt = chart.forward(da, db)
        t, x = cm.forward(np.array([da]), np.array([2.0 + db]))
        t0, x0 = cm.forward(np.array([0.0]), np.array([2.0]))
        assert abs(tt[0] - (t[0] - t0[0])) < 1e-12 and abs(xt[0] - (x[0] - x0[0])) < 1e-12
